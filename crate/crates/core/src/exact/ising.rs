use rayon::prelude::*;

use super::{log_sum_exp, ExactError, EXACT_CAP};
use crate::disorder::DisorderError;
use crate::geometry::EdgeSystem;

/// Exact Ising expectations from full enumeration of the free spins.
#[derive(Clone, Debug)]
pub struct IsingExact {
    /// `log Z`, with weight `exp((β/2)(Σ_e J_e σ_x σ_y + Σ_x h_x σ_x))`.
    pub log_z: f64,
    /// `⟨σ_x σ_y⟩` for every system edge.
    pub edge_corr: Vec<f64>,
    /// `⟨σ_x⟩` for every system site.
    pub site_mag: Vec<f64>,
}

/// Enumerates the Ising model on `system` with the given clamped spins
/// (`None` = free) and weight `exp((β/2) Σ_e J_e σ_x σ_y)`.
pub fn ising_exact(
    system: &EdgeSystem,
    clamps: &[Option<i8>],
    couplings: &[f64],
    beta: f64,
) -> Result<IsingExact, ExactError> {
    ising_exact_with(system, clamps, couplings, None, beta, |_| true)
}

/// General form: an optional per-site field `h` (coupling sum to fixed
/// spins outside the system, say) and a constraint restricting the
/// configurations that count. The constraint sees the full spin vector.
pub fn ising_exact_with<F>(
    system: &EdgeSystem,
    clamps: &[Option<i8>],
    couplings: &[f64],
    field: Option<&[f64]>,
    beta: f64,
    constraint: F,
) -> Result<IsingExact, ExactError>
where
    F: Fn(&[i8]) -> bool + Sync,
{
    let n = system.num_sites();
    let m = system.num_edges();
    if clamps.len() != n {
        return Err(ExactError::LengthMismatch(clamps.len(), n));
    }
    if couplings.len() != m {
        return Err(ExactError::LengthMismatch(couplings.len(), m));
    }
    if let Some(h) = field {
        if h.len() != n {
            return Err(ExactError::LengthMismatch(h.len(), n));
        }
    }
    if !(beta >= 0.0) {
        return Err(DisorderError::NegativeBeta(beta).into());
    }
    let free: Vec<usize> = (0..n).filter(|&i| clamps[i].is_none()).collect();
    if free.len() > EXACT_CAP {
        return Err(ExactError::TooLarge { what: "free spin set", size: free.len(), cap: EXACT_CAP });
    }
    let base: Vec<i8> = clamps.iter().map(|c| c.unwrap_or(1)).collect();
    let edges = system.edges();
    let half = 0.5 * beta;

    let log_w: Vec<f64> = (0..1u64 << free.len())
        .into_par_iter()
        .map_init(
            || base.clone(),
            |spins, mask| {
                for (bit, &i) in free.iter().enumerate() {
                    spins[i] = if mask >> bit & 1 == 1 { -1 } else { 1 };
                }
                if !constraint(spins) {
                    return f64::NEG_INFINITY;
                }
                let mut e = 0.0;
                for (k, [u, v]) in edges.iter().enumerate() {
                    e += couplings[k] * (spins[*u] * spins[*v]) as f64;
                }
                if let Some(h) = field {
                    for (i, &s) in spins.iter().enumerate() {
                        e += h[i] * s as f64;
                    }
                }
                half * e
            },
        )
        .collect();
    let log_z = log_sum_exp(log_w.iter().copied());
    if log_z == f64::NEG_INFINITY {
        return Err(ExactError::ZeroProbabilityCondition);
    }

    // Fixed-size chunks with a sequential reduction keep the sums
    // independent of the thread schedule.
    const CHUNK: usize = 1 << 12;
    let partials: Vec<(Vec<f64>, Vec<f64>)> = log_w
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(c, chunk)| {
            let mut ec = vec![0.0; m];
            let mut sm = vec![0.0; n];
            let mut spins = base.clone();
            for (off, lw) in chunk.iter().enumerate() {
                let p = (lw - log_z).exp();
                if p == 0.0 {
                    continue;
                }
                let mask = c * CHUNK + off;
                for (bit, &i) in free.iter().enumerate() {
                    spins[i] = if mask >> bit & 1 == 1 { -1 } else { 1 };
                }
                for (k, [u, v]) in edges.iter().enumerate() {
                    ec[k] += p * (spins[*u] * spins[*v]) as f64;
                }
                for (i, &s) in spins.iter().enumerate() {
                    sm[i] += p * s as f64;
                }
            }
            (ec, sm)
        })
        .collect();
    let mut edge_corr = vec![0.0; m];
    let mut site_mag = vec![0.0; n];
    for (ec, sm) in partials {
        edge_corr.iter_mut().zip(ec).for_each(|(x, y)| *x += y);
        site_mag.iter_mut().zip(sm).for_each(|(x, y)| *x += y);
    }
    Ok(IsingExact { log_z, edge_corr, site_mag })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_spins() {
        let sys = EdgeSystem::from_edges(2, [([0, 0, 0], [1, 0, 0])]).unwrap();
        let r = ising_exact(&sys, &[None, None], &[0.7], 1.2).unwrap();
        let k: f64 = 0.5 * 1.2 * 0.7;
        assert!((r.edge_corr[0] - k.tanh()).abs() < 1e-14);
        assert!((r.log_z - (4.0 * k.cosh()).ln()).abs() < 1e-13);
        assert!(r.site_mag[0].abs() < 1e-14);
    }

    #[test]
    fn clamped_neighbour() {
        // One free spin next to a clamped +1 spin: ⟨σ⟩ = tanh(βJ/2).
        let sys = EdgeSystem::from_edges(2, [([0, 0, 0], [1, 0, 0])]).unwrap();
        let r = ising_exact(&sys, &[Some(1), None], &[1.0], 2.0).unwrap();
        assert!((r.site_mag[1] - 1f64.tanh()).abs() < 1e-14);
        assert!((r.site_mag[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn constraint_and_field() {
        let sys = EdgeSystem::from_edges(2, [([0, 0, 0], [1, 0, 0])]).unwrap();
        let r = ising_exact_with(&sys, &[None, None], &[0.0], Some(&[1.0, 1.0]), 2.0, |s| s[0] == -1).unwrap();
        assert!((r.site_mag[0] + 1.0).abs() < 1e-14);
        assert!((r.site_mag[1] - 1f64.tanh()).abs() < 1e-14);
        let none = ising_exact_with(&sys, &[None, None], &[0.0], None, 1.0, |_| false);
        assert_eq!(none.unwrap_err(), ExactError::ZeroProbabilityCondition);
    }
}

//! Upper-bound oracle: `φ(q²; θ)` over random `q` in the half space.
//!
//! For any nonnegative `p`, every feasible decomposition satisfies
//! `⟨p⟩_Ω ≥ ω̄((1+θ)⟨p⟩^x + (1−θ)⟨p⟩^y)`, so `φ(q²; θ)` bounds the optimal
//! boundary weight from above.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{OcadError, Result};
use crate::optimizer::moments::{phi_of, phi_star_sq};
use crate::polyspace::{Polynomial2D, SpaceId};

/// `min φ(q²; θ)` over `trials` random `q ∈ P^{⌊k/2⌋}` together with the
/// critical polynomial `q⋆` (always included, so the result is `≤ φ⋆`).
pub fn upper_bound_sampling(k: usize, theta: f64, trials: usize, seed: u64) -> Result<f64> {
    if trials == 0 {
        return Err(OcadError::InvalidArgument("trials must be at least 1".into()));
    }
    let star = phi_star_sq(k, theta)?;
    let half = SpaceId::p(k).half();
    let mut best = phi_of(&star.q_star.square(), theta);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let coeffs: Vec<f64> = (0..half.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let q = Polynomial2D::new(half, coeffs)?;
        let v = phi_of(&q.square(), theta);
        if v.is_finite() && v < best {
            best = v;
        }
    }
    Ok(best)
}

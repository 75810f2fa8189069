//! Conjugate-gradient update parameters.
//!
//! `g`, `ḡ` are the gradient and preconditioned gradient, `y = g₊ − g`,
//! `ȳ = ḡ₊ − ḡ`, and `p` the previous direction. Without preconditioning
//! (`ḡ = g`) every variant reduces to the classical formula.

use crate::vector::dot;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BetaRule {
    PolakRibiere,
    HestenesStiefel,
    HagerZhang,
}

/// How the preconditioned gradient enters the formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BetaVariant {
    /// Left preconditioning: every `g` replaced by `ḡ`.
    Tilde,
    /// Transformation preconditioning: `gᵀg` products become `gᵀḡ`.
    Hat,
}

/// Vectors entering a beta formula.
#[derive(Debug, Clone, Copy)]
pub struct BetaInputs<'a> {
    pub g_new: &'a [f64],
    pub g_old: &'a [f64],
    pub gbar_new: &'a [f64],
    pub gbar_old: &'a [f64],
    pub p: &'a [f64],
}

pub fn beta(rule: BetaRule, variant: BetaVariant, v: &BetaInputs<'_>) -> f64 {
    let y: alloc::vec::Vec<f64> = v.g_new.iter().zip(v.g_old).map(|(a, b)| a - b).collect();
    let ybar: alloc::vec::Vec<f64> = v.gbar_new.iter().zip(v.gbar_old).map(|(a, b)| a - b).collect();
    match variant {
        BetaVariant::Tilde => classical(rule, v.gbar_new, v.gbar_old, &ybar, v.p),
        BetaVariant::Hat => {
            let num = dot(v.g_new, &ybar);
            match rule {
                BetaRule::PolakRibiere => num / dot(v.g_old, v.gbar_old),
                BetaRule::HestenesStiefel => num / dot(&y, v.p),
                BetaRule::HagerZhang => {
                    let yp = dot(&y, v.p);
                    num / yp - 2.0 * dot(v.p, v.g_new) * dot(&y, &ybar) / (yp * yp)
                }
            }
        }
    }
}

/// Classical formulas on `(g₊, g, y, p)`.
pub fn classical(rule: BetaRule, g_new: &[f64], g_old: &[f64], y: &[f64], p: &[f64]) -> f64 {
    match rule {
        BetaRule::PolakRibiere => dot(g_new, y) / dot(g_old, g_old),
        BetaRule::HestenesStiefel => dot(g_new, y) / dot(p, y),
        BetaRule::HagerZhang => {
            let py = dot(p, y);
            let yy = dot(y, y);
            let mut acc = 0.0;
            for i in 0..y.len() {
                acc += (y[i] - 2.0 * p[i] * yy / py) * g_new[i];
            }
            acc / py
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hz_expansion_with_orthogonal_gradient() {
        // g₊ ⟂ p and g₊ ⟂ y: the HZ numerator vanishes.
        let g_new = [0.0, 0.0, 1.0];
        let g_old = [1.0, -1.0, 1.0];
        let p = [1.0, 2.0, 0.0];
        let y: alloc::vec::Vec<f64> = g_new.iter().zip(&g_old).map(|(a, b)| a - b).collect();
        assert_eq!(dot(&g_new, &y), 0.0);
        assert_eq!(classical(BetaRule::HagerZhang, &g_new, &g_old, &y, &p), 0.0);
        // General hand expansion: (g₊ᵀy − 2 (pᵀg₊) yᵀy / pᵀy) / pᵀy.
        let g_new = [0.5, 0.25, 1.0];
        let y: alloc::vec::Vec<f64> = g_new.iter().zip(&g_old).map(|(a, b)| a - b).collect();
        let py = dot(&p, &y);
        let expect = (dot(&g_new, &y) - 2.0 * dot(&p, &g_new) * dot(&y, &y) / py) / py;
        assert!((classical(BetaRule::HagerZhang, &g_new, &g_old, &y, &p) - expect).abs() < 1e-15);
    }

    #[test]
    fn hat_hs_matches_hand_evaluation() {
        let inp = BetaInputs {
            g_new: &[1.0, 2.0],
            g_old: &[0.5, -1.0],
            gbar_new: &[0.25, 1.0],
            gbar_old: &[0.5, 0.5],
            p: &[-1.0, 0.5],
        };
        // y = (0.5, 3), ȳ = (−0.25, 0.5), g₊ᵀȳ = 0.75, yᵀp = 1
        assert!((beta(BetaRule::HestenesStiefel, BetaVariant::Hat, &inp) - 0.75).abs() < 1e-15);
        // gᵀḡ = −0.25
        assert!((beta(BetaRule::PolakRibiere, BetaVariant::Hat, &inp) + 3.0).abs() < 1e-15);
        // yᵀȳ = 1.375, pᵀg₊ = 0: HZ-hat equals HS-hat here.
        assert!((beta(BetaRule::HagerZhang, BetaVariant::Hat, &inp) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn variants_coincide_without_preconditioning() {
        let g_new = [1.0, 2.0, -0.5];
        let g_old = [0.3, -1.0, 0.2];
        let p = [-0.3, 1.0, 0.4];
        let inp = BetaInputs { g_new: &g_new, g_old: &g_old, gbar_new: &g_new, gbar_old: &g_old, p: &p };
        let y: alloc::vec::Vec<f64> = g_new.iter().zip(&g_old).map(|(a, b)| a - b).collect();
        for rule in [BetaRule::PolakRibiere, BetaRule::HestenesStiefel, BetaRule::HagerZhang] {
            let c = classical(rule, &g_new, &g_old, &y, &p);
            assert!((beta(rule, BetaVariant::Tilde, &inp) - c).abs() < 1e-14);
            assert!((beta(rule, BetaVariant::Hat, &inp) - c).abs() < 1e-14);
        }
    }
}

//! Built-in splitting schemes.
//!
//! SABA2 and SBAB2 coefficients come from `scripts/order_conditions.py`,
//! which solves the kick-quadrature order conditions at 40 digits and prints
//! the residuals:
//!
//! ```text
//! SABA2  drift = 0.211324865405187117745425609749, 0.577350269189625764509148780502, (mirror)
//!        kick  = 0.5, 0.5
//! SBAB2  drift = 0.5, 0.5
//!        kick  = 0.166666666666666666666666666667, 0.666666666666666666666666666667, (mirror)
//! ```
//!
//! The closed forms below (`1/2 − √3/6`, `√3/3`, `1/6`, `2/3`) reproduce
//! those digits; `catalog_matches_order_condition_solution` checks it.

use super::{yoshida_compose, SplittingScheme};
use crate::error::{Error, Result};

pub const CATALOG_NAMES: [&str; 7] = [
    "lie-trotter",
    "leapfrog",
    "saba2",
    "sbab2",
    "yoshida4",
    "yoshida6",
    "yoshida8",
];

fn lie_trotter() -> SplittingScheme {
    SplittingScheme::new("lie-trotter", vec![1.0], vec![1.0], 1)
        .expect("valid")
        .with_provenance("first-order drift-then-kick splitting")
}

fn leapfrog() -> SplittingScheme {
    SplittingScheme::new("leapfrog", vec![0.5, 0.5], vec![1.0, 0.0], 2)
        .expect("valid")
        .with_provenance("Stoermer-Verlet drift-kick-drift, word 1/2, 1, 1/2")
}

fn saba2() -> SplittingScheme {
    let c1 = 0.5 - 3f64.sqrt() / 6.0;
    let c2 = 3f64.sqrt() / 3.0;
    SplittingScheme::new("saba2", vec![c1, c2, c1], vec![0.5, 0.5, 0.0], 2)
        .expect("valid")
        .with_provenance("Laskar-Robutel SABA2: kicks at 2-point Gauss nodes; scripts/order_conditions.py")
}

fn sbab2() -> SplittingScheme {
    SplittingScheme::new("sbab2", vec![0.0, 0.5, 0.5], vec![1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0], 2)
        .expect("valid")
        .with_provenance("Laskar-Robutel SBAB2: kicks at 3-point Lobatto nodes; scripts/order_conditions.py")
}

/// Looks a scheme up by (case-insensitive) catalog name.
pub fn builtin_scheme(name: &str) -> Result<SplittingScheme> {
    let key = name.trim().to_ascii_lowercase();
    let scheme = match key.as_str() {
        "lie-trotter" => lie_trotter(),
        "leapfrog" => leapfrog(),
        "saba2" => saba2(),
        "sbab2" => sbab2(),
        "yoshida4" => yoshida_compose(&leapfrog())?
            .with_name("yoshida4")
            .with_provenance("triple-jump of leapfrog, w1 = 1/(2 - 2^(1/3))"),
        "yoshida6" => yoshida_compose(&builtin_scheme("yoshida4")?)?
            .with_name("yoshida6")
            .with_provenance("triple-jump of yoshida4, w1 = 1/(2 - 2^(1/5))"),
        "yoshida8" => yoshida_compose(&builtin_scheme("yoshida6")?)?
            .with_name("yoshida8")
            .with_provenance("triple-jump of yoshida6 (three triple-jumps of leapfrog), w1 = 1/(2 - 2^(1/7))"),
        _ => {
            return Err(Error::Catalog {
                name: name.to_string(),
                available: CATALOG_NAMES.iter().map(|s| s.to_string()).collect(),
            })
        }
    };
    Ok(scheme)
}

/// Every catalog entry, in [`CATALOG_NAMES`] order.
pub fn catalog() -> Vec<SplittingScheme> {
    CATALOG_NAMES
        .iter()
        .map(|n| builtin_scheme(n).expect("catalog names resolve"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrators::{adjoint, is_symmetric, triple_jump_weights, Stage, StageKind};

    /// Σ dᵢ sᵢʲ − 1/(j+1), with sᵢ the drift fraction elapsed before kick i.
    fn kick_moments(s: &SplittingScheme, degree: i32) -> Vec<f64> {
        let mut elapsed = 0.0;
        let mut nodes = Vec::new();
        for st in s.word() {
            match st.kind {
                StageKind::Drift => elapsed += st.coeff,
                StageKind::Kick => nodes.push((elapsed, st.coeff)),
            }
        }
        (0..=degree)
            .map(|j| nodes.iter().map(|(x, w)| w * x.powi(j)).sum::<f64>() - 1.0 / f64::from(j + 1))
            .collect()
    }

    #[test]
    fn lookup_and_unknown_name() {
        let lt = builtin_scheme("lie-trotter").unwrap();
        assert_eq!(
            (lt.drift_coeffs(), lt.kick_coeffs(), lt.nominal_order()),
            (&[1.0][..], &[1.0][..], 1)
        );
        assert_eq!(builtin_scheme("SABA2").unwrap().name(), "saba2");
        match builtin_scheme("rk4") {
            Err(Error::Catalog { available, .. }) => assert_eq!(available.len(), CATALOG_NAMES.len()),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn leapfrog_word() {
        let lf = builtin_scheme("leapfrog").unwrap();
        let word: Vec<f64> = lf.word().iter().map(|s| s.coeff).collect();
        assert_eq!(word, vec![0.5, 1.0, 0.5]);
        assert_eq!(lf.nominal_order(), 2);
    }

    #[test]
    fn yoshida4_outer_weight() {
        // w1 = 1/(2 - 2^(1/3)) = 1.3512071919596576...
        let (w1, w0) = triple_jump_weights(2);
        assert!((w1 - 1.351_207_191_959_657_6).abs() < 1e-15);
        assert!((w0 + 1.702_414_383_919_315_3).abs() < 1e-15);
        let y4 = builtin_scheme("yoshida4").unwrap();
        // the first kick of the composed word is w1 times leapfrog's kick
        let first_kick = y4.word().into_iter().find(|s| s.kind == StageKind::Kick).unwrap();
        assert_eq!(first_kick.coeff, w1);
    }

    #[test]
    fn catalog_matches_order_condition_solution() {
        let saba2 = builtin_scheme("saba2").unwrap();
        let word: Vec<f64> = saba2.word().iter().map(|s| s.coeff).collect();
        let expected = [
            0.211_324_865_405_187_1,
            0.5,
            0.577_350_269_189_625_7,
            0.5,
            0.211_324_865_405_187_1,
        ];
        for (x, e) in word.iter().zip(expected) {
            assert!((x - e).abs() < 1e-16, "{x} vs {e}");
        }
        for m in kick_moments(&saba2, 3) {
            assert!(m.abs() < 1e-15, "{m}");
        }

        let sbab2 = builtin_scheme("sbab2").unwrap();
        let kinds: Vec<StageKind> = sbab2.word().iter().map(|s| s.kind).collect();
        assert_eq!(kinds[0], StageKind::Kick);
        for m in kick_moments(&sbab2, 3) {
            assert!(m.abs() < 1e-15, "{m}");
        }
        // leapfrog integrates only up to degree 1; the next moment is off
        let lf = kick_moments(&builtin_scheme("leapfrog").unwrap(), 2);
        assert!(lf[2].abs() > 1e-2);
    }

    #[test]
    fn every_entry_is_consistent() {
        for s in catalog() {
            let sa: f64 = s.drift_coeffs().iter().sum();
            let sb: f64 = s.kick_coeffs().iter().sum();
            assert!((sa - 1.0).abs() <= 1e-14, "{}: {sa}", s.name());
            assert!((sb - 1.0).abs() <= 1e-14, "{}: {sb}", s.name());
            assert!(!s.provenance().is_empty());
            assert_eq!(is_symmetric(&s), s.name() != "lie-trotter", "{}", s.name());
        }
    }

    #[test]
    fn yoshida_family_orders_and_sizes() {
        let orders: Vec<(u32, usize)> = ["yoshida4", "yoshida6", "yoshida8"]
            .iter()
            .map(|n| {
                let s = builtin_scheme(n).unwrap();
                (s.nominal_order(), s.kick_count())
            })
            .collect();
        assert_eq!(orders, vec![(4, 3), (6, 9), (8, 27)]);
    }

    #[test]
    fn adjoint_of_kick_first_word() {
        let sbab2 = builtin_scheme("sbab2").unwrap();
        let adj = adjoint(&sbab2);
        assert_eq!(adj.word(), sbab2.word());
        let w = [
            Stage {
                kind: StageKind::Kick,
                coeff: 0.25,
            },
            Stage {
                kind: StageKind::Drift,
                coeff: 1.0,
            },
            Stage {
                kind: StageKind::Kick,
                coeff: 0.75,
            },
        ];
        let s = SplittingScheme::from_word("kdk", &w, 1).unwrap();
        assert_eq!(s.drift_coeffs(), &[0.0, 1.0]);
        assert_eq!(s.kick_coeffs(), &[0.25, 0.75]);
    }
}

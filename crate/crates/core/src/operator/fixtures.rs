//! Named reference operators.

use std::sync::Arc;

use crate::exactq::BigRational;

use super::source::{ClosedForm, CoeffSource, MixedSum, MomentSource, Scaled};
use super::{BlockJacobi, OpError};

/// Rotation angle (radians) mixing the two scalar summands of `FIX-BLK`.
pub const BLK_ANGLE: f64 = 1.0;

/// `a_j = 2`, `b_j = 1`.
pub fn fix_lap() -> BlockJacobi {
    let two = BigRational::from_i64(2);
    let one = BigRational::one();
    BlockJacobi::new(Arc::new(ClosedForm::new("FIX-LAP", move |_| (two.clone(), one.clone()))), "FIX-LAP")
}

/// `b_j = β^{j+1}`, `a_j = b_{j-1} + b_j` with `b_{-1} = 0`; needs `β > 1`.
pub fn fix_geo(beta: f64) -> Result<BlockJacobi, OpError> {
    if !(beta.is_finite() && beta > 1.0) {
        return Err(OpError::BadParam(format!("FIX-GEO needs beta > 1, got {beta}")));
    }
    let b = BigRational::from_f64(beta).expect("finite");
    let label = format!("FIX-GEO({})", crate::cli::fmt_g17(beta));
    let rule = move |j: usize| {
        let bj = b.pow(j as u32 + 1);
        let a = if j == 0 { bj.clone() } else { b.pow(j as u32) + &bj };
        (a, bj.square())
    };
    Ok(BlockJacobi::new(Arc::new(ClosedForm::new(label.clone(), rule)), label))
}

/// Coefficients of the moment sequence `θ^{n²}`; needs an integer `θ ≥ 2`.
pub fn fix_ln(theta: u32) -> BlockJacobi {
    assert!(theta >= 2, "FIX-LN needs theta >= 2");
    BlockJacobi::new(Arc::new(MomentSource::log_normal(theta)), format!("FIX-LN({theta})"))
}

/// Scale factor of the second summand of `FIX-BLK`.
pub const BLK_SCALE: i64 = 2;

/// `U (J ⊕ 2J) U*` with `J = FIX-LN(2)` and `U` the rotation by [`BLK_ANGLE`].
///
/// Both summands grow at the same rate, so every `B_j` stays well conditioned.
/// The second summand has Weyl function `x ↦ M(x/2)/2` in terms of the first.
pub fn fix_blk() -> BlockJacobi {
    let ln: Arc<dyn CoeffSource> = Arc::new(MomentSource::log_normal(2));
    let scaled = Scaled::new(ln.clone(), BigRational::from_i64(BLK_SCALE)).expect("exact scalar source");
    let src = MixedSum::new(
        ln,
        Arc::new(scaled),
        MixedSum::rotation(BLK_ANGLE),
    )
    .expect("valid mixing");
    BlockJacobi::new(Arc::new(src), "FIX-BLK")
}

/// Looks up a fixture by name. Accepts `FIX-GEO(4)` or `FIX-GEO` with the
/// parameter given separately; `FIX-GEO` defaults to `β = 4` and `FIX-LN` to
/// `θ = 2`.
pub fn fixture(name: &str, param: Option<f64>) -> Result<BlockJacobi, OpError> {
    let name = name.trim();
    let (base, inline) = match name.split_once('(') {
        Some((b, rest)) => {
            let v = rest
                .strip_suffix(')')
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| OpError::BadParam(format!("cannot parse parameter in {name:?}")))?;
            (b.trim(), Some(v))
        }
        None => (name, None),
    };
    if inline.is_some() && param.is_some() && inline != param {
        return Err(OpError::BadParam(format!("conflicting parameters for {base}")));
    }
    let param = inline.or(param);
    match base.to_ascii_uppercase().as_str() {
        "FIX-LAP" => no_param(base, param).map(|_| fix_lap()),
        "FIX-BLK" => no_param(base, param).map(|_| fix_blk()),
        "FIX-GEO" => fix_geo(param.unwrap_or(4.0)),
        "FIX-LN" => {
            let t = param.unwrap_or(2.0);
            if t.fract() != 0.0 || !(2.0..=1024.0).contains(&t) {
                return Err(OpError::BadParam(format!("FIX-LN needs an integer theta >= 2, got {t}")));
            }
            Ok(fix_ln(t as u32))
        }
        _ => Err(OpError::UnknownFixture(name.to_string())),
    }
}

fn no_param(name: &str, p: Option<f64>) -> Result<(), OpError> {
    match p {
        None => Ok(()),
        Some(_) => Err(OpError::BadParam(format!("{name} takes no parameter"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::invert;

    #[test]
    fn geometric_coefficients() {
        let g = fixture("FIX-GEO(4)", None).unwrap();
        let (a0, b0) = g.exact(0).unwrap().unwrap();
        let (a1, _) = g.exact(1).unwrap().unwrap();
        assert_eq!(a0, BigRational::from_i64(4));
        assert_eq!(b0, BigRational::from_i64(16));
        assert_eq!(a1, BigRational::from_i64(20));
        assert_eq!(g.label(), "FIX-GEO(4)");
    }

    #[test]
    fn log_normal_moments_and_coefficients() {
        let m = super::super::moments::log_normal_moments(2, 4);
        let want: Vec<BigRational> = [1i64, 2, 16, 512].iter().map(|&x| BigRational::from_i64(x)).collect();
        assert_eq!(m, want);
        let ln = fix_ln(2);
        assert_eq!(ln.exact(0).unwrap().unwrap().0, BigRational::from_i64(2));
        let bl = ln.blocks(1).unwrap();
        assert_eq!(bl.a[(0, 0)].re, 38.0);
        assert_eq!(bl.b[(0, 0)].re, 3840f64.sqrt());
    }

    #[test]
    fn block_fixture_off_diagonals_invertible() {
        let blk = fix_blk();
        for j in 0..=20 {
            let b = blk.blocks(j).unwrap().b;
            let det = b[(0, 0)] * b[(1, 1)] - b[(0, 1)] * b[(1, 0)];
            assert!(det.norm() > 0.0);
            assert!(invert(&b, 1e-14).is_ok());
        }
    }

    #[test]
    fn lookup_errors() {
        assert_eq!(fixture("FIX-NOPE", None).unwrap_err(), OpError::UnknownFixture("FIX-NOPE".into()));
        assert!(matches!(fixture("FIX-GEO(0.5)", None), Err(OpError::BadParam(_))));
        assert!(matches!(fixture("FIX-LN(2.5)", None), Err(OpError::BadParam(_))));
        assert!(matches!(fixture("FIX-LAP", Some(3.0)), Err(OpError::BadParam(_))));
        assert_eq!(fixture("FIX-LN", Some(3.0)).unwrap().label(), "FIX-LN(3)");
    }
}

//! The Kummer map E(Q) → Q(S,2)², P ↦ ([x − e1], [x − e2]).

use num_bigint::BigInt;
use num_rational::BigRational;

use super::square_class::{square_class_in, square_class_of_rational_in, SquareClass};
use super::{DescentError, DescentPair};
use crate::curve::{self, CurveError, RationalPoint};
use crate::family::CurveParams;

pub fn phi_image(c: &CurveParams, p: &RationalPoint) -> Result<DescentPair, DescentError> {
    if !curve::contains(c, p) {
        return Err(CurveError::NotOnCurve(p.clone()).into());
    }
    let support = c.bad_primes();
    let x = match p {
        RationalPoint::Infinity => return Ok(DescentPair::new(SquareClass::one(), SquareClass::one())),
        RationalPoint::Affine { x, .. } => x,
    };
    let e1 = BigRational::from_integer(c.e1.clone());
    let e2 = BigRational::from_integer(c.e2.clone());
    let e3 = &c.e3;
    let (b1, b2) = if *x == e1 {
        let d12: BigInt = &c.e1 - &c.e2;
        let d13: BigInt = &c.e1 - e3;
        (square_class_in(&(&d12 * &d13), &support)?, square_class_in(&d12, &support)?)
    } else if *x == e2 {
        let d21: BigInt = &c.e2 - &c.e1;
        let d23: BigInt = &c.e2 - e3;
        (square_class_in(&d21, &support)?, square_class_in(&(&d21 * &d23), &support)?)
    } else {
        (
            square_class_of_rational_in(&(x - &e1), &support)?,
            square_class_of_rational_in(&(x - &e2), &support)?,
        )
    };
    Ok(DescentPair::new(b1, b2))
}

/// Images of (e1, 0), (e2, 0), (e3, 0).
pub fn phi_torsion_images(c: &CurveParams) -> Result<[DescentPair; 3], DescentError> {
    let [t1, t2, t3] = curve::two_torsion(c);
    Ok([phi_image(c, &t1)?, phi_image(c, &t2)?, phi_image(c, &t3)?])
}

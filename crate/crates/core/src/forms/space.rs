use std::fmt;

use num_traits::{One, Zero};
use serde::Serialize;

use super::ring::RingElement;
use super::{FrickeSign, Weight};
use crate::error::{Error, Result};
use crate::linalg::QMatrix;
use crate::qseries::{Rat, Series, Valuation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceKind {
    Full,
    Cusp,
    Plus,
    Minus,
}

impl SpaceKind {
    pub fn name(self) -> &'static str {
        match self {
            SpaceKind::Full => "full",
            SpaceKind::Cusp => "cusp",
            SpaceKind::Plus => "plus",
            SpaceKind::Minus => "minus",
        }
    }
}

impl fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SpaceKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "full" => Ok(SpaceKind::Full),
            "cusp" => Ok(SpaceKind::Cusp),
            "plus" | "+" => Ok(SpaceKind::Plus),
            "minus" | "-" => Ok(SpaceKind::Minus),
            _ => Err(format!("unknown space kind {s:?} (expected full, cusp, plus or minus)")),
        }
    }
}

/// A form given both symbolically and by its q-expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct FormVector {
    pub ring: RingElement,
    pub series: Series,
}

impl FormVector {
    pub fn new(ring: RingElement, prec: usize) -> Self {
        let series = ring.series(prec);
        FormVector { ring, series }
    }

    /// q-expansion of the image under the Fricke involution.
    pub fn w4_series(&self) -> Series {
        self.ring.w4().series(self.series.prec())
    }
}

/// Echelonized basis of a space of forms of one weight.
///
/// Basis vectors have strictly increasing valuations (`pivots`), a unit
/// coefficient at their own pivot and zeros at every other pivot.
#[derive(Debug, Clone)]
pub struct FormSpace {
    weight: Weight,
    kind: SpaceKind,
    basis: Vec<FormVector>,
    pivots: Vec<usize>,
    prec: usize,
}

impl FormSpace {
    /// Echelonizes the span of linearly independent ring elements.
    pub fn from_ring_elements(
        weight: Weight,
        kind: SpaceKind,
        elements: Vec<RingElement>,
        prec: usize,
    ) -> Result<FormSpace> {
        if !elements.is_empty() && prec < elements.len() + 1 {
            return Err(Error::InsufficientPrecision {
                what: format!("echelon basis of a {}-dimensional space", elements.len()),
                needed: elements.len() + 1,
                available: prec,
            });
        }
        let mut rows: Vec<FormVector> = elements.into_iter().map(|r| FormVector::new(r, prec)).collect();
        let mut pivots = Vec::with_capacity(rows.len());
        let mut done = 0;
        let mut col = 0;
        while done < rows.len() && col < prec {
            let Some(p) = (done..rows.len()).find(|&i| !rows[i].series.coeffs()[col].is_zero()) else {
                col += 1;
                continue;
            };
            rows.swap(done, p);
            let inv = rows[done].series.coeffs()[col].recip();
            rows[done] = scale_vector(&rows[done], &inv);
            for i in 0..rows.len() {
                if i == done {
                    continue;
                }
                let c = rows[i].series.coeffs()[col].clone();
                if !c.is_zero() {
                    rows[i] = add_scaled_vector(&rows[i], &-c, &rows[done]);
                }
            }
            pivots.push(col);
            done += 1;
            col += 1;
        }
        if done < rows.len() {
            return Err(Error::InsufficientPrecision {
                what: format!(
                    "echelon basis of weight {weight} {kind} space ({} of {} pivots found)",
                    done,
                    rows.len()
                ),
                needed: prec * 2,
                available: prec,
            });
        }
        Ok(FormSpace {
            weight,
            kind,
            basis: rows,
            pivots,
            prec,
        })
    }

    pub fn weight(&self) -> Weight {
        self.weight
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn prec(&self) -> usize {
        self.prec
    }

    pub fn basis(&self) -> &[FormVector] {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn max_pivot(&self) -> Option<usize> {
        self.pivots.last().copied()
    }

    /// Coordinates of `f` over the echelon basis, with an exact residual check on
    /// every coefficient both sides know.
    pub fn coordinates(&self, f: &Series) -> Result<Vec<Rat>> {
        if let Some(m) = self.max_pivot() {
            if f.prec() <= m {
                return Err(Error::InsufficientPrecision {
                    what: "membership test".into(),
                    needed: m + 1,
                    available: f.prec(),
                });
            }
        }
        let coords: Vec<Rat> = self.pivots.iter().map(|&v| f.coeffs()[v].clone()).collect();
        let mut residual = f.truncate(self.prec);
        for (c, e) in coords.iter().zip(&self.basis) {
            residual = residual.add_scaled(&-c.clone(), &e.series);
        }
        if let Valuation::At(n) = residual.valuation() {
            return Err(Error::NotInSpace(format!(
                "series not in weight {} {} space: residual nonzero at q^{n}",
                self.weight, self.kind
            )));
        }
        Ok(coords)
    }

    /// `sum c_i e_i`.
    pub fn combination(&self, coords: &[Rat]) -> FormVector {
        assert_eq!(coords.len(), self.dim());
        let mut ring = RingElement::zero(self.weight);
        let mut series = Series::zero(self.prec);
        for (c, e) in coords.iter().zip(&self.basis) {
            ring = ring.add(&e.ring.scale(c));
            series = series.add_scaled(c, &e.series);
        }
        FormVector { ring, series }
    }
}

fn scale_vector(v: &FormVector, c: &Rat) -> FormVector {
    FormVector {
        ring: v.ring.scale(c),
        series: v.series.scale(c),
    }
}

fn add_scaled_vector(v: &FormVector, c: &Rat, w: &FormVector) -> FormVector {
    FormVector {
        ring: v.ring.add(&w.ring.scale(c)),
        series: v.series.add_scaled(c, &w.series),
    }
}

/// `sup{0, [k/2] - 1}`: dimension of the cusp space of weight `k + 1/2`.
pub fn cusp_dimension_formula(k: u32) -> usize {
    (k / 2).saturating_sub(1) as usize
}

/// All forms of the given weight, spanned by the monomials `theta^a F2^b`.
pub fn monomial_space(weight: Weight, prec: usize) -> Result<FormSpace> {
    if weight.twice() == 0 {
        return Err(Error::Domain("monomial space needs positive weight".into()));
    }
    let elements = RingElement::monomial_basis(weight)
        .into_iter()
        .map(|(a, b)| RingElement::monomial(a, b))
        .collect();
    FormSpace::from_ring_elements(weight, SpaceKind::Full, elements, prec)
}

/// The two cusp conditions as rows over the monomial basis: constant term of `f`
/// and constant term of its Fricke image. The cusp 1/2 is irregular for
/// half-integral weight and imposes nothing.
fn cusp_condition_rows(weight: Weight) -> Vec<Vec<Rat>> {
    let basis = RingElement::monomial_basis(weight);
    let at_infinity = basis
        .iter()
        .map(|&(a, b)| RingElement::monomial(a, b).constant_term())
        .collect();
    let at_zero = basis
        .iter()
        .map(|&(a, b)| RingElement::monomial(a, b).w4().constant_term())
        .collect();
    vec![at_infinity, at_zero]
}

fn fricke_matrix(weight: Weight) -> QMatrix {
    let basis = RingElement::monomial_basis(weight);
    let cols: Vec<Vec<Rat>> = basis
        .iter()
        .map(|&(a, b)| RingElement::monomial(a, b).w4().coordinates())
        .collect();
    QMatrix::from_columns(&cols, basis.len())
}

fn kernel_elements(weight: Weight, rows: Vec<Vec<Rat>>) -> Vec<RingElement> {
    QMatrix::from_rows(rows)
        .kernel()
        .into_iter()
        .map(|v| RingElement::from_coordinates(weight, &v))
        .collect()
}

/// Cusp forms of weight `k + 1/2`.
pub fn cusp_space(k: u32, prec: usize) -> Result<FormSpace> {
    let weight = Weight::half_integral(k);
    let elements = kernel_elements(weight, cusp_condition_rows(weight));
    let expected = cusp_dimension_formula(k);
    if elements.len() != expected {
        return Err(Error::Consistency(format!(
            "cusp space of weight {weight} has dimension {} but the dimension formula gives {expected}",
            elements.len()
        )));
    }
    FormSpace::from_ring_elements(weight, SpaceKind::Cusp, elements, prec)
}

/// Cusp forms of weight `k + 1/2` with `f|W4 = sign * f`.
pub fn eigen_space(k: u32, sign: FrickeSign, prec: usize) -> Result<FormSpace> {
    let weight = Weight::half_integral(k);
    let cusp_dim = QMatrix::from_rows(cusp_condition_rows(weight)).kernel().len();
    if cusp_dim != cusp_dimension_formula(k) {
        return Err(Error::Consistency(format!(
            "cusp space of weight {weight} has dimension {cusp_dim}, formula gives {}",
            cusp_dimension_formula(k)
        )));
    }
    let eps = Rat::from_integer(sign.as_i32().into());
    let w_minus = fricke_matrix(weight).add_scaled_identity(&-eps);
    let mut rows = cusp_condition_rows(weight);
    rows.extend(w_minus.to_rows());
    let elements = kernel_elements(weight, rows);
    let kind = match sign {
        FrickeSign::Plus => SpaceKind::Plus,
        FrickeSign::Minus => SpaceKind::Minus,
    };
    FormSpace::from_ring_elements(weight, kind, elements, prec)
}

/// `Delta4 * theta^(2k-7)`, a form in the plus space of weight `k + 1/2`.
pub fn plus_form(k: u32, prec: usize) -> Result<FormVector> {
    if k < 4 {
        return Err(Error::Domain(format!("plus form needs k >= 4, got k = {k}")));
    }
    let ring = RingElement::delta4().mul(&RingElement::theta().pow(2 * k - 7));
    Ok(FormVector::new(ring, prec))
}

/// `Delta4 * D2 * theta^(2k-11)`, a form in the minus space of weight `k + 1/2`.
pub fn minus_form(k: u32, prec: usize) -> Result<FormVector> {
    if k < 6 {
        return Err(Error::Domain(format!("minus form needs k >= 6, got k = {k}")));
    }
    let ring = RingElement::delta4()
        .mul(&RingElement::d2())
        .mul(&RingElement::theta().pow(2 * k - 11));
    Ok(FormVector::new(ring, prec))
}

impl FormSpace {
    /// Applies `f -> c f` on the ring side and checks `w4(e) = sign * e` for
    /// every basis element.
    pub fn fricke_sign_holds(&self, sign: FrickeSign) -> bool {
        let eps = Rat::from_integer(sign.as_i32().into());
        self.basis.iter().all(|e| e.ring.w4() == e.ring.scale(&eps))
    }

    /// True when each basis series and its Fricke image vanish at `q^0`.
    pub fn is_cuspidal(&self) -> bool {
        self.basis
            .iter()
            .all(|e| e.series.coeffs().first().is_none_or(Zero::is_zero) && e.ring.w4().constant_term().is_zero())
    }

    /// Unit pivots and zeros at the other pivots.
    pub fn is_reduced_echelon(&self) -> bool {
        self.pivots.windows(2).all(|w| w[0] < w[1])
            && self.basis.iter().enumerate().all(|(i, e)| {
                e.series.valuation() == Valuation::At(self.pivots[i])
                    && self.pivots.iter().enumerate().all(|(j, &p)| {
                        let c = &e.series.coeffs()[p];
                        if i == j {
                            c.is_one()
                        } else {
                            c.is_zero()
                        }
                    })
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_space_dimensions() {
        let s = monomial_space(Weight::half_integral(0), 10).unwrap();
        assert_eq!(s.dim(), 1);
        assert_eq!(s.basis()[0].ring, RingElement::theta());
        let s = monomial_space(Weight::half_integral(4), 10).unwrap();
        assert_eq!(s.dim(), 3);
        assert!(s.is_reduced_echelon());
        assert_eq!(monomial_space(Weight::half_integral(6), 10).unwrap().dim(), 4);
        assert!(monomial_space(Weight::from_twice(0), 10).is_err());
    }

    #[test]
    fn too_little_precision_is_rejected() {
        let e = monomial_space(Weight::half_integral(12), 3).unwrap_err();
        assert!(matches!(e, Error::InsufficientPrecision { .. }));
    }

    #[test]
    fn cusp_dimensions() {
        let s = cusp_space(4, 20).unwrap();
        assert_eq!(s.dim(), 1);
        assert_eq!(s.pivots(), &[1]);
        assert_eq!(cusp_space(3, 20).unwrap().dim(), 0);
        assert_eq!(cusp_space(12, 40).unwrap().dim(), 5);
        for k in 0..=30 {
            let s = cusp_space(k, 40).unwrap();
            assert_eq!(s.dim(), cusp_dimension_formula(k), "k = {k}");
            assert!(s.is_cuspidal());
            assert!(s.is_reduced_echelon());
        }
    }

    #[test]
    fn eigenspaces_split_the_cusp_space() {
        for k in 0..=16 {
            let plus = eigen_space(k, FrickeSign::Plus, 40).unwrap();
            let minus = eigen_space(k, FrickeSign::Minus, 40).unwrap();
            assert_eq!(plus.dim() + minus.dim(), cusp_dimension_formula(k), "k = {k}");
            assert!(plus.fricke_sign_holds(FrickeSign::Plus));
            assert!(minus.fricke_sign_holds(FrickeSign::Minus));
            assert!(plus.is_cuspidal() && minus.is_cuspidal());
        }
    }

    #[test]
    fn small_weight_eigenspaces() {
        let plus = eigen_space(4, FrickeSign::Plus, 30).unwrap();
        assert_eq!(plus.dim(), 1);
        let f1 = plus_form(4, 30).unwrap();
        assert_eq!(plus.coordinates(&f1.series).unwrap(), vec![Rat::one()]);

        let minus = eigen_space(6, FrickeSign::Minus, 30).unwrap();
        assert_eq!(minus.dim(), 1);
        let f2 = minus_form(6, 30).unwrap();
        let c = minus.coordinates(&f2.series).unwrap();
        assert_eq!(c.len(), 1);
        assert!(!c[0].is_zero());

        assert_eq!(eigen_space(5, FrickeSign::Minus, 30).unwrap().dim(), 0);
        for k in 0..4 {
            assert_eq!(eigen_space(k, FrickeSign::Plus, 30).unwrap().dim(), 0);
        }
        for k in 0..6 {
            assert_eq!(eigen_space(k, FrickeSign::Minus, 30).unwrap().dim(), 0);
        }
    }

    #[test]
    fn structured_forms_lie_in_their_eigenspaces() {
        for k in 4..=12 {
            let g = plus_form(k, 40).unwrap();
            assert_eq!(g.ring.w4(), g.ring);
            eigen_space(k, FrickeSign::Plus, 40)
                .unwrap()
                .coordinates(&g.series)
                .unwrap();
        }
        for k in 6..=12 {
            let g = minus_form(k, 40).unwrap();
            assert_eq!(g.ring.w4(), g.ring.scale(&-Rat::one()));
            eigen_space(k, FrickeSign::Minus, 40)
                .unwrap()
                .coordinates(&g.series)
                .unwrap();
        }
        let g = minus_form(11, 10).unwrap();
        assert!(g.ring.terms().keys().all(|(a, _)| *a >= 11));
        assert!(plus_form(3, 10).is_err());
        assert!(minus_form(5, 10).is_err());
    }

    #[test]
    fn membership_rejects_outsiders() {
        let plus = eigen_space(6, FrickeSign::Plus, 30).unwrap();
        let g = minus_form(6, 30).unwrap();
        assert!(matches!(plus.coordinates(&g.series), Err(Error::NotInSpace(_))));
    }

    #[test]
    fn theta_delta4_multiplication_is_an_isomorphism() {
        let td = RingElement::theta().mul(&RingElement::delta4());
        for k in 0..=10u32 {
            let m = monomial_space(Weight::integral(k).max(Weight::from_twice(0)), 40);
            let elements: Vec<RingElement> = match m {
                Ok(space) => space.basis().iter().map(|e| e.ring.clone()).collect(),
                Err(_) => vec![RingElement::monomial(0, 0)],
            };
            let cusp = cusp_space(k + 4, 60).unwrap();
            let images: Vec<RingElement> = elements.iter().map(|e| e.mul(&td)).collect();
            for img in &images {
                cusp.coordinates(&img.series(60)).unwrap();
            }
            let rank = QMatrix::from_rows(images.iter().map(|e| e.coordinates()).collect()).rank();
            assert_eq!(rank, cusp.dim(), "k = {k}");
        }
    }
}

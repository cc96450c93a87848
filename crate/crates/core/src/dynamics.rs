//! Constructions inside X_f itself: the fundamental homoclinic point, the
//! xi map, integer lifts, specification-style gluing, and exact enumeration
//! of the Gamma_n-fixed points through Smith normal form.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::group::{Group, GroupElement};
use crate::invert::TruncatedInverse;
use crate::linalg::ratsolve;
use crate::linalg::snf::smith_normal_form;
use crate::quotient::FiniteQuotient;
use crate::ring::RingElement;
use crate::transfer::{fibre_integrate, QuotientOperator};

fn torus_dist_f64(a: f64, b: f64) -> f64 {
    let t = (a - b).rem_euclid(1.0);
    t.min(1.0 - t)
}

/// A point of the torus shift observed on a finite window: residues in
/// [0, 1) for every window coordinate (zeros are stored explicitly, unlike
/// ring elements).
#[derive(Debug, Clone)]
pub struct TorusPoint {
    group: Group,
    values: std::collections::BTreeMap<GroupElement, f64>,
}

impl TorusPoint {
    /// eta(w) restricted to a window.
    pub fn from_realization(w: &RingElement<f64>, window: &BTreeSet<GroupElement>) -> Result<Self> {
        let group = w.group().clone();
        let mut values = std::collections::BTreeMap::new();
        for g in window {
            group.validate_element(g)?;
            values.insert(g.clone(), w.coeff(g).rem_euclid(1.0));
        }
        Ok(TorusPoint { group, values })
    }

    pub fn zero(group: Group, window: &BTreeSet<GroupElement>) -> Result<Self> {
        let mut values = std::collections::BTreeMap::new();
        for g in window {
            group.validate_element(g)?;
            values.insert(g.clone(), 0.0);
        }
        Ok(TorusPoint { group, values })
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn window(&self) -> impl Iterator<Item = &GroupElement> {
        self.values.keys()
    }

    pub fn window_len(&self) -> usize {
        self.values.len()
    }

    pub fn value(&self, gamma: &GroupElement) -> Option<f64> {
        self.values.get(gamma).copied()
    }

    /// Torus distance to another point at a shared coordinate.
    pub fn distance_at(&self, other: &TorusPoint, gamma: &GroupElement) -> Option<f64> {
        Some(torus_dist_f64(self.value(gamma)?, other.value(gamma)?))
    }

    /// Largest distance of sum_{gamma'} f_{gamma'} x_{gamma gamma'} to the
    /// integers over the window coordinates whose f-neighborhood is fully
    /// covered; `None` when no coordinate is covered.
    pub fn membership_residual<S: crate::ring::Coeff>(
        &self,
        f: &RingElement<S>,
    ) -> Result<Option<f64>> {
        if f.group() != &self.group {
            return Err(Error::DescriptorMismatch(
                "point and element live over different groups".into(),
            ));
        }
        let mut worst: Option<f64> = None;
        'coord: for gamma in self.values.keys() {
            let mut acc = 0.0f64;
            for (gp, c) in f.terms() {
                let key = self.group.multiply(gamma, gp)?;
                let Some(x) = self.value(&key) else {
                    continue 'coord;
                };
                acc += c.to_f64().expect("coefficient fits in f64") * x;
            }
            let d = torus_dist_f64(acc, 0.0);
            worst = Some(worst.map_or(d, |w: f64| w.max(d)));
        }
        Ok(worst)
    }
}

/// The fundamental homoclinic point x_f = eta((w_f)^*) observed on the
/// radius-R word ball.
pub fn homoclinic_point(
    f: &RingElement<f64>,
    inv: &TruncatedInverse,
    radius: u32,
    ball_cap: usize,
) -> Result<TorusPoint> {
    if f.group() != inv.element.group() {
        return Err(Error::DescriptorMismatch(
            "inverse belongs to a different group".into(),
        ));
    }
    let descriptor = match f.group() {
        Group::Ambient(d) => d.clone(),
        Group::Quotient(_) => {
            return Err(Error::Parameter(
                "homoclinic points live over the ambient group".into(),
            ))
        }
    };
    let window = crate::group::word_ball(
        &descriptor,
        &descriptor.standard_generators(),
        radius,
        ball_cap,
    )?;
    let w_tilde = inv.element.involute();
    TorusPoint::from_realization(&w_tilde, &window)
}

/// xi(v) = eta(rho_{w_f} v) on the requested window, computed as the ring
/// convolution v * (w_f)^* with the truncated inverse.
pub fn xi_map(
    v: &RingElement<BigInt>,
    inv: &TruncatedInverse,
    window: &BTreeSet<GroupElement>,
) -> Result<TorusPoint> {
    let realization = v.to_f64().convolve(&inv.element.involute())?;
    TorusPoint::from_realization(&realization, window)
}

/// A Gamma_n-fixed point with exact rational coordinates indexed by the
/// quotient enumeration; all coordinates share one denominator.
#[derive(Debug, Clone)]
pub struct PeriodicPoint {
    quotient: Arc<FiniteQuotient>,
    numerators: Vec<BigInt>,
    denominator: BigInt,
}

impl PartialEq for PeriodicPoint {
    fn eq(&self, other: &Self) -> bool {
        self.quotient == other.quotient
            && self.numerators.len() == other.numerators.len()
            && self
                .numerators
                .iter()
                .zip(&other.numerators)
                .all(|(a, b)| a * &other.denominator == b * &self.denominator)
    }
}

impl PeriodicPoint {
    pub fn new(
        quotient: Arc<FiniteQuotient>,
        numerators: Vec<BigInt>,
        denominator: BigInt,
    ) -> Result<Self> {
        if numerators.len() != quotient.order() as usize {
            return Err(Error::Parameter(
                "periodic point needs one value per quotient element".into(),
            ));
        }
        if denominator <= BigInt::zero() {
            return Err(Error::Parameter("denominator must be positive".into()));
        }
        let numerators = numerators
            .into_iter()
            .map(|n| n.mod_floor_big(&denominator))
            .collect();
        Ok(PeriodicPoint {
            quotient,
            numerators,
            denominator,
        })
    }

    pub fn quotient(&self) -> &Arc<FiniteQuotient> {
        &self.quotient
    }

    pub fn denominator(&self) -> &BigInt {
        &self.denominator
    }

    pub fn numerators(&self) -> &[BigInt] {
        &self.numerators
    }

    pub fn value(&self, idx: usize) -> BigRational {
        BigRational::new(self.numerators[idx].clone(), self.denominator.clone())
    }

    pub fn values(&self) -> Vec<BigRational> {
        (0..self.numerators.len()).map(|i| self.value(i)).collect()
    }

    /// Exact check of the defining relation: for every coset delta,
    /// sum_{gamma'} f_{gamma'} x_{delta gamma'} lies in Z.
    pub fn satisfies_relation(&self, f: &RingElement<BigInt>) -> Result<bool> {
        let q = &self.quotient;
        let support: Vec<(usize, BigInt)> = f
            .terms()
            .iter()
            .map(|(g, c)| Ok((q.project_index(g)?, c.clone())))
            .collect::<Result<_>>()?;
        for i in 0..self.numerators.len() {
            let mut acc = BigInt::zero();
            for (dj, c) in &support {
                let j = q.multiply_idx(i, *dj);
                acc += c * &self.numerators[j];
            }
            if !(acc % &self.denominator).is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Exact value at an ambient group element (by projection); used to view
    /// the point as a Gamma_n-invariant configuration on all of Gamma.
    pub fn value_at_ambient(&self, g: &GroupElement) -> Result<BigRational> {
        Ok(self.value(self.quotient.project_index(g)?))
    }

    /// Rational strings like "2/3" in enumeration order.
    pub fn value_strings(&self) -> Vec<String> {
        self.values()
            .iter()
            .map(|v| {
                if v.denom().is_one() {
                    format!("{}", v.numer())
                } else {
                    format!("{}/{}", v.numer(), v.denom())
                }
            })
            .collect()
    }
}

trait ModFloorBig {
    fn mod_floor_big(self, m: &BigInt) -> BigInt;
}

impl ModFloorBig for BigInt {
    fn mod_floor_big(self, m: &BigInt) -> BigInt {
        let r = self % m;
        if r.is_negative() {
            r + m
        } else {
            r
        }
    }
}

/// Exact xi on a Gamma_n-periodic integer configuration: on periodic
/// functions rho_{w_f} is the inverse of the quotient operator, so xi(v) is
/// the exact rational solution of rho_{f^(n)} z = v reduced mod 1.
pub fn xi_periodic_exact(
    v: &[BigInt],
    f: &RingElement<BigInt>,
    q: &Arc<FiniteQuotient>,
    dense_cap: u64,
) -> Result<PeriodicPoint> {
    let fq = fibre_integrate(f, q)?;
    let op = QuotientOperator::from_element(&fq, dense_cap)?;
    let n = op.order();
    if v.len() != n {
        return Err(Error::Parameter(
            "periodic configuration needs one value per quotient element".into(),
        ));
    }
    let Some(z) = ratsolve::solve_int_system(op.rows(), n, v) else {
        return Err(Error::Precondition(
            "quotient operator is singular; xi is not invertible at this level".into(),
        ));
    };
    // Common denominator.
    let mut denom = BigInt::one();
    for zi in &z {
        denom = num_integer::lcm(denom, zi.denom().clone());
    }
    let numerators = z
        .iter()
        .map(|zi| zi.numer() * (&denom / zi.denom()))
        .collect();
    PeriodicPoint::new(Arc::clone(q), numerators, denom)
}

/// Integer lift of a periodic point: choose the representative with entries
/// in [-1/2, 1/2) and return v = rho_f w, which is exactly integral for
/// points of X_f and satisfies ||v||_inf <= ||f||_1 / 2.
pub fn lift_periodic(x: &PeriodicPoint, f: &RingElement<BigInt>) -> Result<Vec<BigInt>> {
    let q = x.quotient();
    let n = q.order() as usize;
    let d = x.denominator();
    // Centered numerators: num - d when 2 num >= d.
    let centered: Vec<BigInt> = x
        .numerators()
        .iter()
        .map(|num| if num * 2 >= *d { num - d } else { num.clone() })
        .collect();
    let support: Vec<(usize, BigInt)> = f
        .terms()
        .iter()
        .map(|(g, c)| Ok((q.project_index(g)?, c.clone())))
        .collect::<Result<_>>()?;
    let mut v = Vec::with_capacity(n);
    for i in 0..n {
        let mut acc = BigInt::zero();
        for (dj, c) in &support {
            let j = q.multiply_idx(i, *dj);
            acc += c * &centered[j];
        }
        if !(&acc % d).is_zero() {
            return Err(Error::Precondition(
                "point does not satisfy the defining relation exactly".into(),
            ));
        }
        v.push(acc / d);
    }
    let norm_f: BigInt = f.norm_l1();
    for vi in &v {
        // |v_i| <= ||f||_1 / 2, i.e. 2 |v_i| <= ||f||_1.
        if vi.abs() * 2 > norm_f {
            return Err(Error::Inconsistent(
                "lift exceeded the ||f||_1 / 2 bound".into(),
            ));
        }
    }
    Ok(v)
}

/// Window lift: round rho_f applied to the centered real representative on
/// the covered part of the window. Errors when no coordinate has its whole
/// f-neighborhood inside the window.
pub fn lift_window(
    x: &TorusPoint,
    f: &RingElement<BigInt>,
    tolerance: f64,
) -> Result<RingElement<BigInt>> {
    let group = x.group().clone();
    let centered = |t: f64| if t >= 0.5 { t - 1.0 } else { t };
    let mut terms: Vec<(GroupElement, BigInt)> = Vec::new();
    let mut covered = 0usize;
    'coord: for gamma in x.window() {
        let mut acc = 0.0f64;
        for (gp, c) in f.terms() {
            let key = group.multiply(gamma, gp)?;
            let Some(t) = x.value(&key) else {
                continue 'coord;
            };
            acc += c.to_f64().expect("fits f64") * centered(t);
        }
        covered += 1;
        let rounded = acc.round();
        if (acc - rounded).abs() > tolerance {
            return Err(Error::Precondition(format!(
                "residual {:.3e} at {gamma:?} exceeds tolerance {tolerance:.1e}; \
                 the point is not (close to) a member of X_f",
                (acc - rounded).abs()
            )));
        }
        if rounded != 0.0 {
            terms.push((gamma.clone(), BigInt::from(rounded as i64)));
        }
    }
    if covered == 0 {
        return Err(Error::Window(
            "no window coordinate has its full f-neighborhood covered".into(),
        ));
    }
    RingElement::from_terms(group, terms)
}

/// The outcome of a specification gluing.
#[derive(Debug, Clone)]
pub struct GlueResult {
    pub point: TorusPoint,
    /// The finite window F_epsilon used for the construction.
    pub f_window: BTreeSet<GroupElement>,
    /// Largest observed deviation d(x_i, y) over the prescribed windows.
    pub max_deviation: f64,
    /// Membership residual of the glued point on its window.
    pub residual: f64,
}

/// Glues x1 on C1 with x2 on C2 to accuracy epsilon: picks F_eps with
/// tail ||w_f||_{l1 off F} < eps / ||f||_1, checks the enlarged windows are
/// disjoint, lifts both points, splices the lifts, and maps back through xi.
/// Every guarantee is re-verified coordinatewise before returning.
pub fn specification_glue(
    x1: &TorusPoint,
    x2: &TorusPoint,
    c1: &BTreeSet<GroupElement>,
    c2: &BTreeSet<GroupElement>,
    epsilon: f64,
    f: &RingElement<BigInt>,
    inv: &TruncatedInverse,
) -> Result<GlueResult> {
    if epsilon <= 0.0 {
        return Err(Error::Parameter("epsilon must be positive".into()));
    }
    let group = inv.element.group().clone();
    let parent = group.descriptor().clone();
    let ff = f.to_f64();
    let norm_f = ff.norm_l1_f64();
    let w = &inv.element;
    let tau = inv.tail_bound;
    let budget = epsilon / norm_f;
    // Greedy F_eps by descending coefficient magnitude.
    let mut by_mag: Vec<(&GroupElement, f64)> =
        w.terms().iter().map(|(g, v)| (g, v.abs())).collect();
    by_mag.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite").then(a.0.cmp(b.0)));
    let total: f64 = by_mag.iter().map(|p| p.1).sum();
    let mut f_window: Vec<GroupElement> = Vec::new();
    let mut kept = 0.0f64;
    let mut prefix_tail: Vec<f64> = Vec::new(); // tail after keeping i elements
    prefix_tail.push(total + tau);
    for (g, m) in &by_mag {
        if total - kept + tau < budget {
            break;
        }
        f_window.push((*g).clone());
        kept += m;
        prefix_tail.push(total - kept + tau);
    }
    if total - kept + tau >= budget {
        return Err(Error::Construction(format!(
            "inverse tail {:.3e} cannot reach below eps/||f||_1 = {:.3e}; refine the inverse",
            tau, budget
        )));
    }
    // Disjointness of the enlarged windows, in both the stated form
    // F C1 and F C2 and the form actually used for the splice, C_i F^{-1}.
    let product = |left: &[GroupElement],
                   right: &BTreeSet<GroupElement>,
                   invert_left: bool|
     -> Result<BTreeSet<GroupElement>> {
        let mut out = BTreeSet::new();
        for a in left {
            let a = if invert_left {
                parent.inverse(a)?
            } else {
                a.clone()
            };
            for b in right {
                out.insert(parent.multiply(&a, b)?);
            }
        }
        Ok(out)
    };
    let right_product =
        |c: &BTreeSet<GroupElement>, fs: &[GroupElement]| -> Result<BTreeSet<GroupElement>> {
            let mut out = BTreeSet::new();
            for a in c {
                for b in fs {
                    out.insert(parent.multiply(a, &parent.inverse(b)?)?);
                }
            }
            Ok(out)
        };
    let fc1 = product(&f_window, c1, false)?;
    let fc2 = product(&f_window, c2, false)?;
    let d1 = right_product(c1, &f_window)?;
    let d2 = right_product(c2, &f_window)?;
    let overlap = fc1.intersection(&fc2).next().is_some() || d1.intersection(&d2).next().is_some();
    if overlap {
        // Minimal feasible epsilon: shrink the window until disjoint and
        // report the corresponding tail times ||f||_1.
        let mut min_epsilon = f64::INFINITY;
        for keep in (0..f_window.len()).rev() {
            let fw = &f_window[..keep];
            let fc1 = product(fw, c1, false)?;
            let fc2 = product(fw, c2, false)?;
            let d1 = right_product(c1, fw)?;
            let d2 = right_product(c2, fw)?;
            if fc1.intersection(&fc2).next().is_none() && d1.intersection(&d2).next().is_none() {
                min_epsilon = prefix_tail[keep] * norm_f * (1.0 + 1e-9);
                break;
            }
        }
        return Err(Error::WindowOverlap { min_epsilon });
    }
    // Lifts on the spliced domains.
    let restrict =
        |x: &TorusPoint, domain: &BTreeSet<GroupElement>| -> Result<RingElement<BigInt>> {
            // lift_window only uses coordinates whose f-neighborhood is present;
            // we pre-check that every domain coordinate is covered by x.
            for gamma in domain {
                for gp in f.terms().keys() {
                    let key = parent.multiply(gamma, gp)?;
                    if x.value(&key).is_none() {
                        return Err(Error::Window(format!(
                            "point window does not cover {key:?} needed for the lift on {gamma:?}"
                        )));
                    }
                }
            }
            let v = lift_window(x, f, 1e-6)?;
            let kept: Vec<(GroupElement, BigInt)> = v
                .terms()
                .iter()
                .filter(|(g, _)| domain.contains(*g))
                .map(|(g, c)| (g.clone(), c.clone()))
                .collect();
            RingElement::from_terms(Group::Ambient(parent.clone()), kept)
        };
    let v1 = restrict(x1, &d1)?;
    let v2 = restrict(x2, &d2)?;
    let v = v1.add(&v2)?;
    // y = xi(v) on a window large enough to re-check membership on C1 u C2.
    let mut ywin: BTreeSet<GroupElement> = c1.union(c2).cloned().collect();
    for gamma in c1.union(c2) {
        for gp in f.terms().keys() {
            ywin.insert(parent.multiply(gamma, gp)?);
        }
    }
    let y = xi_map(&v, inv, &ywin)?;
    let mut max_dev = 0.0f64;
    for (x, c) in [(x1, c1), (x2, c2)] {
        for gamma in c.iter() {
            let dev = x.distance_at(&y, gamma).ok_or_else(|| {
                Error::Window(format!("prescribed window coordinate {gamma:?} missing"))
            })?;
            max_dev = max_dev.max(dev);
        }
    }
    if max_dev >= epsilon {
        return Err(Error::Construction(format!(
            "glued point deviates by {max_dev:.3e} >= epsilon on a prescribed window"
        )));
    }
    let residual = y.membership_residual(f)?.unwrap_or(0.0);
    Ok(GlueResult {
        point: y,
        f_window: f_window.into_iter().collect(),
        max_deviation: max_dev,
        residual,
    })
}

/// The group of Gamma_n-fixed points: elementary divisors, count, and
/// (below the cap) the exactly enumerated points.
#[derive(Debug, Clone)]
pub struct FixedPointGroup {
    pub quotient: Arc<FiniteQuotient>,
    pub smith_diagonal: Vec<BigUint>,
    pub count: BigUint,
    pub points: Option<Vec<PeriodicPoint>>,
}

#[derive(Debug, Clone)]
pub enum FixEnumeration {
    Finite(FixedPointGroup),
    InfiniteFixedGroup,
}

impl FixEnumeration {
    pub fn finite(self) -> Option<FixedPointGroup> {
        match self {
            FixEnumeration::Finite(g) => Some(g),
            FixEnumeration::InfiniteFixedGroup => None,
        }
    }
}

/// Smith normal form of the integer operator; when the count is within the
/// cap, all fixed points are enumerated as exact rationals and each is
/// verified against the defining relation.
pub fn enumerate_fixed_points(
    f: &RingElement<BigInt>,
    q: &Arc<FiniteQuotient>,
    cap: u64,
    dense_cap: u64,
) -> Result<FixEnumeration> {
    let fq = fibre_integrate(f, q)?;
    let op = QuotientOperator::from_element(&fq, dense_cap)?;
    let n = op.order();
    let matrix = op.rows().to_vec();
    let snf = smith_normal_form(matrix.clone(), n);
    if snf.diag.iter().any(|d| d.is_zero()) {
        return Ok(FixEnumeration::InfiniteFixedGroup);
    }
    let mut count = BigUint::one();
    for d in &snf.diag {
        count *= d.to_biguint().expect("positive divisor");
    }
    let diag_u: Vec<BigUint> = snf
        .diag
        .iter()
        .map(|d| d.to_biguint().expect("positive divisor"))
        .collect();
    let points = if count <= BigUint::from(cap) {
        // Common denominator: the largest elementary divisor.
        let big_d = snf.diag[n - 1].clone();
        let scale: Vec<BigInt> = snf.diag.iter().map(|d| &big_d / d).collect();
        let dims: Vec<u64> = snf
            .diag
            .iter()
            .map(|d| d.to_u64().expect("divisor below enumeration cap"))
            .collect();
        let count_usize = count.to_u64().expect("count below cap") as usize;
        let mut pts = Vec::with_capacity(count_usize);
        let mut k = vec![0u64; n];
        loop {
            // numerator_j = sum_i V[j][i] k_i (D / d_i)  (mod D)
            let mut nums = Vec::with_capacity(n);
            for j in 0..n {
                let mut acc = BigInt::zero();
                for (i, &ki) in k.iter().enumerate() {
                    if ki != 0 {
                        acc += &snf.right[j * n + i] * &scale[i] * BigInt::from(ki);
                    }
                }
                nums.push(acc);
            }
            pts.push(PeriodicPoint::new(Arc::clone(q), nums, big_d.clone())?);
            // Odometer over mixed radix dims.
            let mut pos = n;
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                k[pos] += 1;
                if k[pos] < dims[pos] {
                    break;
                }
                k[pos] = 0;
                if pos == 0 {
                    pos = usize::MAX;
                    break;
                }
            }
            if pos == usize::MAX {
                break;
            }
        }
        debug_assert_eq!(pts.len(), count_usize);
        for p in &pts {
            if !p.satisfies_relation(f)? {
                return Err(Error::Inconsistent(
                    "enumerated point fails the defining relation".into(),
                ));
            }
        }
        Some(pts)
    } else {
        None
    };
    Ok(FixEnumeration::Finite(FixedPointGroup {
        quotient: Arc::clone(q),
        smith_diagonal: diag_u,
        count,
        points,
    }))
}

#[derive(Debug, Clone)]
pub struct SeparationStats {
    pub pairs: usize,
    /// Smallest over pairs of the largest coordinate gap, as a fraction of 1.
    pub min_max_gap: f64,
}

/// Exhaustive pairwise separation check: any two distinct fixed points must
/// differ by at least 1/(3 ||f||_1) at some quotient coordinate.
pub fn check_pairwise_separation(
    points: &[PeriodicPoint],
    f_norm_l1: &BigInt,
) -> Result<SeparationStats> {
    if points.is_empty() {
        return Ok(SeparationStats {
            pairs: 0,
            min_max_gap: f64::INFINITY,
        });
    }
    let d = points[0].denominator().clone();
    for p in points {
        if p.denominator() != &d {
            return Err(Error::Parameter(
                "separation check expects a shared denominator".into(),
            ));
        }
    }
    let three_norm = BigInt::from(3) * f_norm_l1;
    // Fast path in i64 when everything fits.
    let d_i64 = d.to_i64();
    let tn_i64 = three_norm.to_i64();
    let mut pairs = 0usize;
    let mut min_max_gap = f64::INFINITY;
    if let (Some(dd), Some(tn)) = (d_i64, tn_i64) {
        let nums: Vec<Vec<i64>> = points
            .iter()
            .map(|p| {
                p.numerators()
                    .iter()
                    .map(|x| x.to_i64().expect("numerator below denominator"))
                    .collect()
            })
            .collect();
        for a in 0..nums.len() {
            for b in a + 1..nums.len() {
                let mut best: i64 = 0;
                for (xa, xb) in nums[a].iter().zip(&nums[b]) {
                    let diff = (xa - xb).rem_euclid(dd);
                    let gap = diff.min(dd - diff);
                    if gap > best {
                        best = gap;
                        // separated as soon as 3 ||f||_1 * gap >= denominator
                        if tn.checked_mul(best).is_none_or(|lhs| lhs >= dd) {
                            break;
                        }
                    }
                }
                if (tn as i128) * (best as i128) < dd as i128 {
                    return Err(Error::Inconsistent(format!(
                        "points {a} and {b} are closer than 1/(3 ||f||_1) everywhere"
                    )));
                }
                pairs += 1;
                min_max_gap = min_max_gap.min(best as f64 / dd as f64);
            }
        }
    } else {
        for a in 0..points.len() {
            for b in a + 1..points.len() {
                let mut best = BigInt::zero();
                for (xa, xb) in points[a].numerators().iter().zip(points[b].numerators()) {
                    let diff = (xa - xb).mod_floor_big(&d);
                    let gap = (&d - &diff).min(diff);
                    if gap > best {
                        best = gap;
                    }
                }
                if &three_norm * &best < d {
                    return Err(Error::Inconsistent(format!(
                        "points {a} and {b} are closer than 1/(3 ||f||_1) everywhere"
                    )));
                }
                pairs += 1;
                let gap_f = best.to_f64().unwrap_or(0.0) / d.to_f64().unwrap_or(1.0);
                min_max_gap = min_max_gap.min(gap_f);
            }
        }
    }
    Ok(SeparationStats { pairs, min_max_gap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::{fixed_points_exact, FixCount};
    use crate::group::GroupDescriptor;
    use crate::invert::l1_inverse;

    fn z_desc() -> GroupDescriptor {
        GroupDescriptor::FreeAbelian(1)
    }

    fn el(k: i64) -> GroupElement {
        GroupElement::new(vec![k])
    }

    fn zi(pairs: &[(i64, i64)]) -> RingElement<BigInt> {
        RingElement::from_terms(
            Group::Ambient(z_desc()),
            pairs.iter().map(|&(k, c)| (el(k), BigInt::from(c))),
        )
        .unwrap()
    }

    fn window(range: std::ops::RangeInclusive<i64>) -> BTreeSet<GroupElement> {
        range.map(el).collect()
    }

    #[test]
    fn homoclinic_point_of_two_minus_x() {
        let fi = zi(&[(0, 2), (1, -1)]);
        let ff = fi.to_f64();
        let inv = l1_inverse(&ff, 1e-10, 64).unwrap();
        let x = homoclinic_point(&ff, &inv, 10, 10_000).unwrap();
        assert_eq!(x.value(&el(0)), Some(0.5));
        assert_eq!(x.value(&el(-1)), Some(0.25));
        assert_eq!(x.value(&el(5)), Some(0.0));
        let res = x.membership_residual(&fi).unwrap().unwrap();
        assert!(res <= inv.tail_bound * 3.0 + 1e-12);
    }

    #[test]
    fn homoclinic_point_of_scalar() {
        let fi = zi(&[(0, 2)]);
        let ff = fi.to_f64();
        let inv = l1_inverse(&ff, 1e-12, 8).unwrap();
        let x = homoclinic_point(&ff, &inv, 4, 1000).unwrap();
        assert_eq!(x.value(&el(0)), Some(0.5));
        assert_eq!(x.value(&el(1)), Some(0.0));
    }

    #[test]
    fn homoclinic_value_of_symmetric_laplacian_is_inverse_sqrt5() {
        let fi = zi(&[(0, 3), (1, -1), (-1, -1)]);
        let ff = fi.to_f64();
        let inv = l1_inverse(&ff, 1e-12, 64).unwrap();
        let x = homoclinic_point(&ff, &inv, 8, 10_000).unwrap();
        // Independent oracle: the identity coefficient of the inverse is the
        // Fourier integral of 1/(3 - 2 cos), evaluated by trapezoid
        // quadrature on a grid fine enough for spectral accuracy.
        let n = 4096;
        let oracle: f64 = (0..n)
            .map(|j| {
                let theta = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
                1.0 / (3.0 - 2.0 * theta.cos())
            })
            .sum::<f64>()
            / n as f64;
        assert!((oracle - 1.0 / 5f64.sqrt()).abs() < 1e-12);
        assert!((x.value(&el(0)).unwrap() - oracle).abs() < 1e-10);
        // Symmetric decay on both sides of the identity.
        assert!((x.value(&el(2)).unwrap() - x.value(&el(-2)).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn lift_window_needs_a_covered_neighborhood() {
        let fi = zi(&[(0, 2), (1, -1)]);
        let single: BTreeSet<GroupElement> = [el(5)].into_iter().collect();
        let x = TorusPoint::zero(Group::Ambient(z_desc()), &single).unwrap();
        // The window holds gamma = 5 but not 5 + 1, so no coordinate has a
        // covered f-neighborhood.
        assert!(matches!(lift_window(&x, &fi, 1e-6), Err(Error::Window(_))));
    }

    #[test]
    fn xi_of_unit_is_homoclinic_point() {
        let fi = zi(&[(0, 2), (1, -1)]);
        let ff = fi.to_f64();
        let inv = l1_inverse(&ff, 1e-10, 64).unwrap();
        let win = window(-6..=6);
        let v = RingElement::basis(Group::Ambient(z_desc()), el(0)).unwrap();
        let xi_e = xi_map(&v, &inv, &win).unwrap();
        let hom = homoclinic_point(&ff, &inv, 6, 1000).unwrap();
        for g in &win {
            assert!((xi_e.value(g).unwrap() - hom.value(g).unwrap()).abs() < 1e-12);
        }
        // xi(0) = 0.
        let zero = xi_map(&RingElement::zero(Group::Ambient(z_desc())), &inv, &win).unwrap();
        assert!(zero.window().all(|g| zero.value(g) == Some(0.0)));
        // xi(e(gamma)) is the lambda^gamma shift of the homoclinic point.
        let v1 = RingElement::basis(Group::Ambient(z_desc()), el(1)).unwrap();
        let xi_shift = xi_map(&v1, &inv, &win).unwrap();
        for k in -5..=5 {
            let a = xi_shift.value(&el(k)).unwrap();
            // (lambda^gamma w)_k = w_{gamma^{-1} k} = w-tilde at k - 1
            let b = hom.value(&el(k - 1)).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn enumerate_mod_2_points_of_two_minus_x() {
        let f = zi(&[(0, 2), (1, -1)]);
        let q = FiniteQuotient::congruence(&z_desc(), 2, 100).unwrap();
        let fixed = enumerate_fixed_points(&f, &q, 100, 8192)
            .unwrap()
            .finite()
            .unwrap();
        assert_eq!(fixed.count, BigUint::from(3u32));
        assert_eq!(
            fixed.smith_diagonal,
            vec![BigUint::from(1u32), BigUint::from(3u32)]
        );
        let points = fixed.points.unwrap();
        let mut sets: Vec<Vec<String>> = points.iter().map(|p| p.value_strings()).collect();
        sets.sort();
        assert_eq!(
            sets,
            vec![
                vec!["0".to_string(), "0".to_string()],
                vec!["1/3".to_string(), "2/3".to_string()],
                vec!["2/3".to_string(), "1/3".to_string()],
            ]
        );
    }

    #[test]
    fn enumerate_scalar_lattice() {
        let f = zi(&[(0, 2)]);
        let q = FiniteQuotient::congruence(&z_desc(), 2, 100).unwrap();
        let fixed = enumerate_fixed_points(&f, &q, 100, 8192)
            .unwrap()
            .finite()
            .unwrap();
        assert_eq!(fixed.count, BigUint::from(4u32));
        assert_eq!(
            fixed.smith_diagonal,
            vec![BigUint::from(2u32), BigUint::from(2u32)]
        );
    }

    #[test]
    fn enumeration_count_matches_bareiss() {
        let f = zi(&[(0, 3), (1, -1), (-1, -1)]);
        let q = FiniteQuotient::congruence(&z_desc(), 3, 100).unwrap();
        let fixed = enumerate_fixed_points(&f, &q, 100, 8192)
            .unwrap()
            .finite()
            .unwrap();
        assert_eq!(fixed.count, BigUint::from(16u32));
        match fixed_points_exact(&f, &q, 8192).unwrap() {
            FixCount::Finite(c) => assert_eq!(c, fixed.count),
            _ => panic!("expected finite count"),
        }
        let points = fixed.points.unwrap();
        assert_eq!(points.len(), 16);
        let stats = check_pairwise_separation(&points, &f.norm_l1()).unwrap();
        assert_eq!(stats.pairs, 16 * 15 / 2);
        assert!(stats.min_max_gap >= 1.0 / 15.0 - 1e-12);
    }

    #[test]
    fn singular_operator_is_infinite_fixed_group() {
        let f = zi(&[(0, 1), (1, -1)]);
        let q = FiniteQuotient::congruence(&z_desc(), 4, 100).unwrap();
        assert!(matches!(
            enumerate_fixed_points(&f, &q, 100, 8192).unwrap(),
            FixEnumeration::InfiniteFixedGroup
        ));
    }

    #[test]
    fn lift_of_mod2_point() {
        let f = zi(&[(0, 2), (1, -1)]);
        let q = FiniteQuotient::congruence(&z_desc(), 2, 100).unwrap();
        // x = (1/3, 2/3)
        let x = PeriodicPoint::new(
            Arc::clone(&q),
            vec![BigInt::from(1), BigInt::from(2)],
            BigInt::from(3),
        )
        .unwrap();
        let v = lift_periodic(&x, &f).unwrap();
        assert_eq!(v, vec![BigInt::from(1), BigInt::from(-1)]);
        // Round trip through exact xi.
        let back = xi_periodic_exact(&v, &f, &q, 8192).unwrap();
        assert_eq!(back, x);
    }

    #[test]
    fn lift_of_zero_is_zero() {
        let f = zi(&[(0, 2), (1, -1)]);
        let q = FiniteQuotient::congruence(&z_desc(), 2, 100).unwrap();
        let x = PeriodicPoint::new(
            Arc::clone(&q),
            vec![BigInt::zero(), BigInt::zero()],
            BigInt::one(),
        )
        .unwrap();
        assert_eq!(lift_periodic(&x, &f).unwrap(), vec![BigInt::zero(); 2]);
    }

    #[test]
    fn exact_round_trip_for_all_enumerated_points() {
        let f = zi(&[(0, 3), (1, -1), (-1, -1)]);
        let q = FiniteQuotient::congruence(&z_desc(), 3, 100).unwrap();
        let fixed = enumerate_fixed_points(&f, &q, 100, 8192)
            .unwrap()
            .finite()
            .unwrap();
        for p in fixed.points.unwrap() {
            let v = lift_periodic(&p, &f).unwrap();
            let back = xi_periodic_exact(&v, &f, &q, 8192).unwrap();
            assert_eq!(back, p);
        }
    }

    #[test]
    fn glue_homoclinic_with_zero() {
        let fi = zi(&[(0, 2), (1, -1)]);
        let ff = fi.to_f64();
        let inv = l1_inverse(&ff, 1e-12, 64).unwrap();
        let big_window = window(-30..=40);
        let x1 = {
            let w_tilde = inv.element.involute();
            TorusPoint::from_realization(&w_tilde, &big_window).unwrap()
        };
        let x2 = TorusPoint::zero(Group::Ambient(z_desc()), &big_window).unwrap();
        let c1 = window(-2..=2);
        let c2 = window(10..=14);
        let glued = specification_glue(&x1, &x2, &c1, &c2, 0.1, &fi, &inv).unwrap();
        // Spec'd window for eps = 0.1: F = {0..4} (tail 2^-5 = 1/32 < 1/30).
        assert_eq!(glued.f_window, window(0..=4));
        assert!(glued.max_deviation < 0.1);
        assert!(glued.residual < 1e-9);
    }

    #[test]
    fn glue_rejects_overlapping_windows() {
        let fi = zi(&[(0, 2), (1, -1)]);
        let ff = fi.to_f64();
        let inv = l1_inverse(&ff, 1e-12, 64).unwrap();
        let big_window = window(-30..=40);
        let w_tilde = inv.element.involute();
        let x1 = TorusPoint::from_realization(&w_tilde, &big_window).unwrap();
        let x2 = TorusPoint::zero(Group::Ambient(z_desc()), &big_window).unwrap();
        let c1 = window(-2..=2);
        let c2 = window(3..=7); // F_eps C1 and F_eps C2 overlap
        let err = specification_glue(&x1, &x2, &c1, &c2, 0.1, &fi, &inv).unwrap_err();
        match err {
            Error::WindowOverlap { min_epsilon } => assert!(min_epsilon > 0.1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn degenerate_glue_of_equal_points() {
        let fi = zi(&[(0, 2), (1, -1)]);
        let ff = fi.to_f64();
        let inv = l1_inverse(&ff, 1e-12, 64).unwrap();
        let big_window = window(-40..=60);
        let w_tilde = inv.element.involute();
        let x = TorusPoint::from_realization(&w_tilde, &big_window).unwrap();
        let c1 = window(-2..=2);
        let c2 = window(20..=24);
        let glued = specification_glue(&x, &x, &c1, &c2, 0.1, &fi, &inv).unwrap();
        assert!(glued.max_deviation < 0.1);
    }
}

//! Right `Gamma(N)`-orbits on matrices whose rows lie in prescribed classes
//! of `N^-1 Z^2 / Z^2`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_integer::Integer;
use num_traits::ToPrimitive;

use super::slash::{mat_det, mat_mul, Mat2, TAU};
use crate::cyclotomic::Rational;
use crate::eisenstein::TorsionPoint;
use crate::error::{Error, Result};

/// A rational matrix with entries in `N^-1 Z`, stored as `N` times itself.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RatMatrix2 {
    level: u32,
    num: Mat2<i64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Pos,
    Neg,
}

impl Sign {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "+" | "pos" => Ok(Sign::Pos),
            "-" | "neg" => Ok(Sign::Neg),
            _ => Err(Error::Parse(format!("sign {s:?}"))),
        }
    }
}

impl RatMatrix2 {
    pub fn new(level: u32, num: Mat2<i64>) -> Result<Self> {
        if (num[0], num[1]) == (0, 0) || (num[2], num[3]) == (0, 0) {
            return Err(Error::InvalidArgument("zero row".into()));
        }
        Ok(RatMatrix2 { level, num })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// `N` times the matrix.
    pub fn scaled(&self) -> Mat2<i64> {
        self.num
    }

    pub fn entries(&self) -> [Rational; 4] {
        self.num
            .map(|x| Rational::new(x.into(), (self.level as i64).into()))
    }

    pub fn det(&self) -> Rational {
        let n = self.level as i64;
        Rational::new(mat_det(&self.num).into(), (n * n).into())
    }

    pub fn rows(&self) -> (TorsionPoint, TorsionPoint) {
        let n = self.level;
        (
            TorsionPoint::new(n, self.num[0], self.num[1]),
            TorsionPoint::new(n, self.num[2], self.num[3]),
        )
    }

    pub fn left_mul(&self, g: &Mat2<i64>) -> Result<Self> {
        RatMatrix2::new(self.level, mat_mul(g, &self.num))
    }
}

impl fmt::Display for RatMatrix2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = self.entries();
        write!(f, "{} {} {} {} ({})", e[0], e[1], e[2], e[3], self.det())
    }
}

/// Column Hermite form `(g 0; c d)` of the scaled matrix, `g > 0` and
/// `0 <= c < |d|`, plus the reduction mod `N` of the `SL(2,Z)` factor `V`
/// with `N M = H V`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrbitKey {
    pub hnf: [i64; 3],
    pub coset: [u32; 4],
}

impl fmt::Display for OrbitKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [g, c, d] = self.hnf;
        let v = self.coset;
        write!(f, "H=({g} 0; {c} {d}) V=({} {}; {} {})", v[0], v[1], v[2], v[3])
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Orbit {
    pub key: OrbitKey,
    pub rep: RatMatrix2,
}

fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    let e = a.extended_gcd(&b);
    if e.gcd < 0 {
        (-e.gcd, -e.x, -e.y)
    } else {
        (e.gcd, e.x, e.y)
    }
}

fn reduce(v: &Mat2<i64>, n: u32) -> [u32; 4] {
    v.map(|x| x.rem_euclid(n as i64) as u32)
}

/// Returns `H` and `V` with `a = H V`, `V` in `SL(2,Z)`.
fn column_hnf(a: &Mat2<i64>) -> Result<(Mat2<i64>, Mat2<i64>)> {
    if mat_det(a) == 0 {
        return Err(Error::InvalidArgument("singular matrix has no orbit key".into()));
    }
    let (g, x, y) = ext_gcd(a[0], a[1]);
    let u = [x, -a[1] / g, y, a[0] / g];
    let b = mat_mul(a, &u);
    let d = b[3];
    let k = b[2].div_euclid(d.abs()) * d.signum();
    let u2 = [1, 0, -k, 1];
    let h = mat_mul(&b, &u2);
    let uu = mat_mul(&u, &u2);
    let v = [uu[3], -uu[1], -uu[2], uu[0]];
    debug_assert_eq!(mat_mul(&h, &v), *a);
    Ok((h, v))
}

pub fn orbit_key(m: &RatMatrix2) -> Result<OrbitKey> {
    let (h, v) = column_hnf(&m.num)?;
    Ok(OrbitKey {
        hnf: [h[0], h[2], h[3]],
        coset: reduce(&v, m.level),
    })
}

/// Elements of `SL(2, Z/N)`, lexicographic.
pub fn sl2_mod(n: u32) -> Vec<[u32; 4]> {
    if n == 1 {
        return vec![[0; 4]];
    }
    let mut out = Vec::new();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    if (a * d + n * n - b * c) % n == 1 % n {
                        out.push([a, b, c, d]);
                    }
                }
            }
        }
    }
    out
}

/// A matrix in `SL(2,Z)` reducing to `v` mod `N`.
pub fn lift_sl2(v: &[u32; 4], n: u32) -> Result<Mat2<i64>> {
    if n == 1 {
        return Ok([1, 0, 0, 1]);
    }
    let n = n as i64;
    let [a0, b0, c0, d0] = v.map(|x| x as i64);
    let c = if c0 == 0 { n } else { c0 };
    let d = (0..=c.abs() * n)
        .map(|t| d0 + t * n)
        .find(|d| d.gcd(&c) == 1)
        .ok_or_else(|| Error::InvalidArgument("bottom row not primitive mod N".into()))?;
    // a d - b c = 1
    let (_, x, y) = ext_gcd(d, -c);
    for t in 0..n {
        let (a, b) = (x + t * c, y + t * d);
        if (a - a0).rem_euclid(n) == 0 && (b - b0).rem_euclid(n) == 0 {
            return Ok([a, b, c, d]);
        }
    }
    Err(Error::InvalidArgument(format!("{v:?} is not in SL(2, Z/{n})")))
}

/// Largest integer determinant of `N M` under the bound on `|det M|`.
fn scaled_bound(det_bound: &Rational, n: u32) -> Result<i64> {
    if *det_bound <= Rational::from_integer(0.into()) {
        return Err(Error::InvalidArgument("determinant bound must be positive".into()));
    }
    let s = det_bound * Rational::from_integer(((n * n) as i64).into());
    s.floor()
        .to_integer()
        .to_i64()
        .ok_or_else(|| Error::InvalidArgument("determinant bound too large".into()))
}

/// Every orbit of `X^sign` with `0 < |det| <= det_bound`, grouped by the
/// pair of row classes.
pub fn enumerate_all_orbits(
    level: u32,
    det_bound: &Rational,
    sign: Sign,
) -> Result<BTreeMap<(TorsionPoint, TorsionPoint), Vec<Orbit>>> {
    if level == 0 {
        return Err(Error::InvalidArgument("level must be positive".into()));
    }
    let dmax = scaled_bound(det_bound, level)?;
    let cosets = sl2_mod(level);
    let lifts: Vec<Mat2<i64>> = cosets
        .iter()
        .map(|v| lift_sl2(v, level))
        .collect::<Result<_>>()?;
    let mut out: BTreeMap<_, Vec<Orbit>> = BTreeMap::new();
    for det in 1..=dmax {
        for g in (1..=det).filter(|g| det % g == 0) {
            let d = match sign {
                Sign::Pos => det / g,
                Sign::Neg => -det / g,
            };
            for c in 0..d.abs() {
                let h = [g, 0, c, d];
                for (v, lift) in cosets.iter().zip(&lifts) {
                    let rep = RatMatrix2::new(level, mat_mul(&h, lift))?;
                    let key = OrbitKey { hnf: [g, c, d], coset: *v };
                    out.entry(rep.rows()).or_default().push(Orbit { key, rep });
                }
            }
        }
    }
    for v in out.values_mut() {
        v.sort_by_key(|x| x.key);
    }
    Ok(out)
}

/// Orbit representatives of `X^sign_{lam,mu}` with `0 < |det M| <= det_bound`.
pub fn enumerate_orbits(
    lam: TorsionPoint,
    mu: TorsionPoint,
    det_bound: &Rational,
    sign: Sign,
) -> Result<Vec<Orbit>> {
    if lam.level() != mu.level() {
        return Err(Error::LevelMismatch { left: lam.level(), right: mu.level() });
    }
    let mut all = enumerate_all_orbits(lam.level(), det_bound, sign)?;
    Ok(all.remove(&(lam, mu)).unwrap_or_default())
}

/// `M^-1 M'` when it lies in `Gamma(N)`.
pub fn transporter(m: &RatMatrix2, m2: &RatMatrix2) -> Option<Mat2<i64>> {
    let a = m.num;
    let det = mat_det(&a);
    if det == 0 || m.level != m2.level {
        return None;
    }
    let adj = [a[3], -a[1], -a[2], a[0]];
    let p = mat_mul(&adj, &m2.num);
    if p.iter().any(|x| x % det != 0) {
        return None;
    }
    let g = p.map(|x| x / det);
    let n = m.level as i64;
    let id = [1, 0, 0, 1];
    let cong = (0..4).all(|i| (g[i] - id[i]).rem_euclid(n) == 0);
    (mat_det(&g) == 1 && cong).then_some(g)
}

#[derive(Clone, Debug, Default)]
pub struct BijectionReport {
    /// `(name, passed, first offending matrix)`.
    pub checks: Vec<(String, bool, Option<String>)>,
}

impl BijectionReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.1)
    }
}

type OrbitTable = BTreeMap<(TorsionPoint, TorsionPoint), Vec<Orbit>>;

fn keys_of(table: &OrbitTable, pair: (TorsionPoint, TorsionPoint)) -> BTreeSet<OrbitKey> {
    table.get(&pair).map(|v| v.iter().map(|o| o.key).collect()).unwrap_or_default()
}

/// Maps every orbit of `table[src]` by `g` and compares with `target[dst]`.
fn check_map(
    name: String,
    table: &OrbitTable,
    target: &OrbitTable,
    src: (TorsionPoint, TorsionPoint),
    dst: (TorsionPoint, TorsionPoint),
    g: &Mat2<i64>,
    det_sign: i64,
) -> Result<(String, bool, Option<String>)> {
    let want = keys_of(target, dst);
    let mut seen = BTreeSet::new();
    let empty = Vec::new();
    for o in table.get(&src).unwrap_or(&empty) {
        let img = o.rep.left_mul(g)?;
        let key = orbit_key(&img)?;
        let ok = img.rows() == dst
            && img.det() == o.rep.det() * Rational::from_integer(det_sign.into())
            && want.contains(&key)
            && seen.insert(key);
        if !ok {
            return Ok((name, false, Some(o.rep.to_string())));
        }
    }
    if seen.len() != want.len() {
        let missing = want.difference(&seen).next().map(|k| k.to_string());
        return Ok((name, false, missing));
    }
    Ok((name, true, None))
}

/// Bijections `tau^-1: Y+_{a,b} -> Y+_{c,a}`, `tau^-2: Y+_{a,b} -> Y+_{b,c}`
/// over all orderings of the triple, `Nmat: Y+_{mu,lam} -> Y-_{lam,mu}`,
/// and `tau^3 = 1` on keys.
pub fn check_tau_bijections(
    lam: TorsionPoint,
    mu: TorsionPoint,
    nu: TorsionPoint,
    det_bound: &Rational,
) -> Result<BijectionReport> {
    let level = lam.level();
    if mu.level() != level || nu.level() != level {
        return Err(Error::LevelMismatch { left: level, right: mu.level().max(nu.level()) });
    }
    if !lam.add(&mu)?.add(&nu)?.is_zero() {
        return Err(Error::InvalidArgument("triple does not sum to zero".into()));
    }
    let pos = enumerate_all_orbits(level, det_bound, Sign::Pos)?;
    let neg = enumerate_all_orbits(level, det_bound, Sign::Neg)?;
    check_tau_bijections_with(&pos, &neg, lam, mu, nu)
}

pub(crate) fn check_tau_bijections_with(
    pos: &OrbitTable,
    neg: &OrbitTable,
    lam: TorsionPoint,
    mu: TorsionPoint,
    nu: TorsionPoint,
) -> Result<BijectionReport> {
    let tau_inv: Mat2<i64> = [-1, -1, 1, 0];
    let tau_inv2 = TAU;
    let nmat: Mat2<i64> = [0, 1, 1, 0];
    let pts = [lam, mu, nu];
    let mut report = BijectionReport::default();
    for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1), (1, 0, 2), (0, 2, 1), (2, 1, 0)] {
        let (a, b, c) = (pts[i], pts[j], pts[k]);
        report.checks.push(check_map(
            format!("tau^-1 Y+[{a};{b}] -> Y+[{c};{a}]"),
            pos,
            pos,
            (a, b),
            (c, a),
            &tau_inv,
            1,
        )?);
        report.checks.push(check_map(
            format!("tau^-2 Y+[{a};{b}] -> Y+[{b};{c}]"),
            pos,
            pos,
            (a, b),
            (b, c),
            &tau_inv2,
            1,
        )?);
        report.checks.push(check_map(
            format!("N Y+[{b};{a}] -> Y-[{a};{b}]"),
            pos,
            neg,
            (b, a),
            (a, b),
            &nmat,
            -1,
        )?);
    }
    let tau_cubed = mat_mul(&tau_inv, &mat_mul(&tau_inv, &tau_inv));
    let mut bad = None;
    for o in pos.get(&(lam, mu)).into_iter().flatten() {
        if orbit_key(&o.rep.left_mul(&tau_cubed)?)? != o.key {
            bad = Some(o.rep.to_string());
            break;
        }
    }
    report.checks.push((format!("tau^3 on Y+[{lam};{mu}]"), bad.is_none(), bad));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn r(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    #[test]
    fn level_one_det_one_is_a_single_orbit() {
        let z = TorsionPoint::zero(1);
        assert_eq!(enumerate_orbits(z, z, &r(1), Sign::Pos).unwrap().len(), 1);
    }

    #[test]
    fn level_one_det_two_counts() {
        let z = TorsionPoint::zero(1);
        let all = enumerate_orbits(z, z, &r(2), Sign::Pos).unwrap();
        let det2: Vec<_> = all.iter().filter(|o| o.rep.det() == r(2)).collect();
        assert_eq!(det2.len(), 3);
        // brute force: classes of small det-2 matrices under the transporter relation
        let mut classes: Vec<RatMatrix2> = Vec::new();
        let range = -3..=3i64;
        for a in range.clone() {
            for b in range.clone() {
                for c in range.clone() {
                    for d in range.clone() {
                        if a * d - b * c != 2 {
                            continue;
                        }
                        let m = RatMatrix2::new(1, [a, b, c, d]).unwrap();
                        if !classes.iter().any(|x| transporter(x, &m).is_some()) {
                            classes.push(m);
                        }
                    }
                }
            }
        }
        assert_eq!(classes.len(), 3);
    }

    #[test]
    fn lifts_reduce_correctly() {
        for n in 1..=6 {
            for v in sl2_mod(n) {
                let g = lift_sl2(&v, n).unwrap();
                assert_eq!(mat_det(&g), 1);
                assert_eq!(reduce(&g, n), v);
            }
        }
        assert_eq!(sl2_mod(3).len(), 24);
        assert_eq!(sl2_mod(4).len(), 48);
    }

    #[test]
    fn representatives_have_their_keys() {
        for n in [2, 3] {
            for sign in [Sign::Pos, Sign::Neg] {
                let all = enumerate_all_orbits(n, &r(2), sign).unwrap();
                for ((lam, mu), orbits) in &all {
                    for o in orbits {
                        assert_eq!(o.rep.rows(), (*lam, *mu));
                        assert_eq!(orbit_key(&o.rep).unwrap(), o.key);
                    }
                }
            }
        }
    }

    // keys equal iff a transporter in Gamma(N) exists
    #[test]
    fn key_is_a_complete_invariant() {
        for n in [2u32, 3, 4] {
            let half = Rational::new(1.into(), 2.into());
            let table = enumerate_all_orbits(n, &half, Sign::Pos).unwrap();
            for orbits in table.values() {
                for (i, x) in orbits.iter().enumerate() {
                    for (j, y) in orbits.iter().enumerate() {
                        assert_eq!(transporter(&x.rep, &y.rep).is_some(), i == j);
                    }
                }
            }
        }
    }

    #[test]
    fn random_members_match_one_orbit() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for n in [3u32, 4] {
            let table = enumerate_all_orbits(n, &r(2), Sign::Pos).unwrap();
            let bound = 2 * (n * n) as i64;
            let mut hits = 0;
            while hits < 200 {
                let num: Mat2<i64> = [0; 4].map(|_| rng.gen_range(-12..=12));
                let det = mat_det(&num);
                if det <= 0 || det > bound {
                    continue;
                }
                hits += 1;
                let m = RatMatrix2::new(n, num).unwrap();
                let orbits = &table[&m.rows()];
                let matching: Vec<_> =
                    orbits.iter().filter(|o| transporter(&o.rep, &m).is_some()).collect();
                assert_eq!(matching.len(), 1, "{m}");
                assert_eq!(matching[0].key, orbit_key(&m).unwrap());
            }
        }
    }

    #[test]
    fn bijections_at_level_three() {
        let n = 3;
        let pos = enumerate_all_orbits(n, &r(2), Sign::Pos).unwrap();
        let neg = enumerate_all_orbits(n, &r(2), Sign::Neg).unwrap();
        for lam in TorsionPoint::all(n) {
            for mu in TorsionPoint::all(n) {
                let nu = lam.add(&mu).unwrap().neg();
                let rep = check_tau_bijections_with(&pos, &neg, lam, mu, nu).unwrap();
                assert!(rep.passed(), "{:?}", rep.checks.iter().find(|c| !c.1));
            }
        }
    }

    #[test]
    fn wrong_target_is_detected() {
        let n = 3;
        let pos = enumerate_all_orbits(n, &r(1), Sign::Pos).unwrap();
        let (lam, mu) = (TorsionPoint::new(3, 1, 0), TorsionPoint::new(3, 0, 1));
        let nu = lam.add(&mu).unwrap().neg();
        let bad = check_map("x".into(), &pos, &pos, (lam, mu), (lam, nu), &[-1, -1, 1, 0], 1)
            .unwrap();
        assert!(!bad.1);
    }

    #[test]
    fn display_format() {
        let m = RatMatrix2::new(3, [3, 0, 1, 3]).unwrap();
        assert_eq!(m.to_string(), "1 0 1/3 1 (1)");
    }

    #[test]
    fn rejects_bad_input() {
        let z = TorsionPoint::zero(3);
        assert!(enumerate_orbits(z, z, &r(0), Sign::Pos).is_err());
        let p = TorsionPoint::new(3, 1, 0);
        assert!(check_tau_bijections(p, p, p.neg(), &r(1)).is_err());
        assert!(RatMatrix2::new(3, [0, 0, 1, 1]).is_err());
    }
}

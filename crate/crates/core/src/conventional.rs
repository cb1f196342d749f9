//! Region-by-region (conventional) piecewise-linear functions.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::affine::{dot, norm, AffineFunction, Halfspace, Region};
use crate::error::{check_dim, PwlError, Result};
use crate::lp;
use crate::repr::PwlFunction;
use crate::text::{expect_dim, fmt_real, fmt_reals, header, Line, Reader};

/// Minimum inscribed radius for a shared boundary to count as a facet.
const FACET_TOL: f64 = 1e-7;
/// Relative tolerance on piece agreement across a facet.
const CONTINUITY_TOL: f64 = 1e-9;
/// Tolerance when matching boundary hyperplanes and jump coefficients.
const MATCH_TOL: f64 = 1e-7;
/// Cap on how far facet samples wander from the facet center.
const SAMPLE_REACH: f64 = 10.0;

/// A continuous PWL function listed region by region.
#[derive(Debug, Clone, PartialEq)]
pub struct ConventionalPwl {
    dim: usize,
    regions: Vec<Region>,
    pieces: Vec<AffineFunction>,
    domain: Option<Region>,
}

/// Boundary hyperplane in canonical unit-normal form (first non-zero normal
/// component positive): `normal · x + offset = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperplane {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl Hyperplane {
    fn canonical(h: &Halfspace) -> Self {
        let (mut n, mut c) = h.normalized();
        if let Some(first) = n.iter().copied().find(|v| v.abs() > 1e-12) {
            if first < 0.0 {
                n.iter_mut().for_each(|v| *v = -*v);
                c = -c;
            }
        }
        Self { normal: n, offset: c }
    }

    fn matches(&self, other: &Self) -> bool {
        (self.offset - other.offset).abs() <= MATCH_TOL
            && self
                .normal
                .iter()
                .zip(&other.normal)
                .all(|(a, b)| (a - b).abs() <= MATCH_TOL)
    }

    fn coplanar_with(&self, h: &Halfspace) -> bool {
        self.matches(&Self::canonical(h))
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        dot(&self.normal, x) + self.offset
    }

    pub fn as_affine(&self) -> AffineFunction {
        AffineFunction::new(self.normal.clone(), self.offset)
    }
}

impl fmt::Display for Hyperplane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]·x + {} = 0", fmt_reals(&self.normal), fmt_real(self.offset))
    }
}

/// An (n−1)-dimensional boundary shared by two regions.
#[derive(Debug, Clone)]
pub struct Facet {
    /// Region indices (positions in the model, not labels).
    pub first: usize,
    pub second: usize,
    pub hyperplane: Hyperplane,
    /// A relative-interior point of the facet.
    pub center: Vec<f64>,
    constraints: Vec<Halfspace>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuityViolation {
    /// Region labels on either side.
    pub labels: (usize, usize),
    pub point: Vec<f64>,
    pub values: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuityReport {
    pub facets_checked: usize,
    pub points_checked: usize,
    pub violations: Vec<ContinuityViolation>,
}

impl ContinuityReport {
    pub fn is_continuous(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ContinuityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "facets_checked: {}", self.facets_checked)?;
        writeln!(f, "points_checked: {}", self.points_checked)?;
        writeln!(f, "continuity_violations: {}", self.violations.len())?;
        for v in &self.violations {
            writeln!(
                f,
                "violation: regions={},{} x={} values={},{}",
                v.labels.0,
                v.labels.1,
                fmt_reals(&v.point),
                fmt_real(v.values.0),
                fmt_real(v.values.1)
            )?;
        }
        Ok(())
    }
}

/// Jump structure across one boundary hyperplane.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryJump {
    pub hyperplane: Hyperplane,
    /// `J_pos − J_neg = c · normal` for every neighbouring pair, when
    /// consistent.
    pub coefficient: Option<f64>,
    pub pairs: Vec<(usize, usize, f64)>,
}

/// Verdict of the consistent-variation test.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationVerdict {
    pub representable: bool,
    pub boundaries: Vec<BoundaryJump>,
    /// Offending hyperplane and reason when not representable.
    pub certificate: Option<String>,
}

impl fmt::Display for VariationVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "boundary_hyperplanes: {}", self.boundaries.len())?;
        writeln!(f, "cplr_representable: {}", self.representable)?;
        if let Some(c) = &self.certificate {
            writeln!(f, "certificate: {c}")?;
        }
        Ok(())
    }
}

impl ConventionalPwl {
    pub fn new(
        dim: usize,
        regions: Vec<Region>,
        pieces: Vec<AffineFunction>,
        domain: Option<Region>,
    ) -> Result<Self> {
        if pieces.is_empty() || regions.len() != pieces.len() {
            return Err(PwlError::InvalidModel(format!(
                "need d >= 1 pieces aligned with regions (got {} regions, {} pieces)",
                regions.len(),
                pieces.len()
            )));
        }
        for p in &pieces {
            check_dim(dim, p.dim())?;
            if !p.is_finite() {
                return Err(PwlError::InvalidModel("piece has non-finite entries".into()));
            }
        }
        for h in regions
            .iter()
            .chain(domain.iter())
            .flat_map(|r| r.halfspaces.iter())
        {
            check_dim(dim, h.dim())?;
        }
        let mut labels: Vec<_> = regions.iter().map(|r| r.label).collect();
        labels.sort_unstable();
        labels.dedup();
        if labels.len() != regions.len() {
            return Err(PwlError::InvalidModel("region labels must be distinct".into()));
        }
        Ok(Self {
            dim,
            regions,
            pieces,
            domain,
        })
    }

    /// Builds the model and certifies each region non-empty.
    pub fn validated(
        dim: usize,
        regions: Vec<Region>,
        pieces: Vec<AffineFunction>,
        domain: Option<Region>,
    ) -> Result<Self> {
        let extra: Vec<Halfspace> = domain.iter().flat_map(|d| d.halfspaces.clone()).collect();
        for r in &regions {
            Region::validated(r.halfspaces.clone(), r.label, &extra)?;
        }
        Self::new(dim, regions, pieces, domain)
    }

    /// A single affine piece over the whole space (or `domain`).
    pub fn affine(piece: AffineFunction, domain: Option<Region>) -> Self {
        Self {
            dim: piece.dim(),
            regions: vec![Region::new(Vec::new(), 1)],
            pieces: vec![piece],
            domain,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn pieces(&self) -> &[AffineFunction] {
        &self.pieces
    }

    pub fn domain(&self) -> Option<&Region> {
        self.domain.as_ref()
    }

    pub fn domain_halfspaces(&self) -> Vec<Halfspace> {
        self.domain.iter().flat_map(|d| d.halfspaces.clone()).collect()
    }

    /// Index of the lowest-labelled region containing `x`.
    pub fn locate(&self, x: &[f64]) -> Result<usize> {
        check_dim(self.dim, x.len())?;
        let gap = || PwlError::CoverageGap { point: x.to_vec() };
        if let Some(d) = &self.domain {
            if !d.contains(x) {
                return Err(gap());
            }
        }
        self.regions
            .iter()
            .enumerate()
            .filter(|(_, r)| r.contains(x))
            .min_by_key(|(_, r)| r.label)
            .map(|(i, _)| i)
            .ok_or_else(gap)
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let i = self.locate(x)?;
        Ok(self.pieces[i].eval_unchecked(x))
    }

    /// Constraints of region `i` intersected with the domain.
    pub fn region_constraints(&self, i: usize) -> Vec<Halfspace> {
        let mut hs = self.regions[i].halfspaces.clone();
        hs.extend(self.domain_halfspaces());
        hs
    }

    /// Interior point and inscribed radius of region `i` (within the domain).
    pub fn region_center(&self, i: usize) -> Result<Option<(Vec<f64>, f64)>> {
        lp::chebyshev_center(self.dim, &self.region_constraints(i), &[])
    }

    /// Every (n−1)-dimensional boundary shared by two regions.
    pub fn facets(&self) -> Result<Vec<Facet>> {
        let domain = self.domain_halfspaces();
        let mut facets = Vec::new();
        for i in 0..self.regions.len() {
            for j in (i + 1)..self.regions.len() {
                let mut seen: Vec<Hyperplane> = Vec::new();
                let candidates = self.regions[i]
                    .halfspaces
                    .iter()
                    .chain(&self.regions[j].halfspaces);
                for h in candidates {
                    let plane = Hyperplane::canonical(h);
                    if seen.iter().any(|p| p.matches(&plane)) {
                        continue;
                    }
                    seen.push(plane.clone());
                    let constraints: Vec<Halfspace> = self.regions[i]
                        .halfspaces
                        .iter()
                        .chain(&self.regions[j].halfspaces)
                        .chain(&domain)
                        .filter(|g| !plane.coplanar_with(g))
                        .cloned()
                        .collect();
                    let probe = lp::chebyshev_center(self.dim, &constraints, &[plane.as_affine()])?;
                    if let Some((center, slack)) = probe {
                        if slack > FACET_TOL {
                            facets.push(Facet {
                                first: i,
                                second: j,
                                hyperplane: plane,
                                center,
                                constraints,
                            });
                        }
                    }
                }
            }
        }
        Ok(facets)
    }

    /// Samples pieces on every facet and reports disagreements.
    pub fn check_continuity(&self, samples_per_facet: usize) -> Result<ContinuityReport> {
        let facets = self.facets()?;
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_c0de);
        let mut violations = Vec::new();
        let mut points_checked = 0;
        for facet in &facets {
            let (pa, pb) = (&self.pieces[facet.first], &self.pieces[facet.second]);
            let mut worst: Option<(f64, ContinuityViolation)> = None;
            for x in sample_facet(facet, samples_per_facet.max(1), &mut rng) {
                points_checked += 1;
                let (va, vb) = (pa.eval_unchecked(&x), pb.eval_unchecked(&x));
                let gap = (va - vb).abs();
                let scale = 1f64.max(va.abs()).max(vb.abs());
                if gap > CONTINUITY_TOL * scale && worst.as_ref().is_none_or(|(g, _)| gap > *g) {
                    worst = Some((
                        gap,
                        ContinuityViolation {
                            labels: (self.regions[facet.first].label, self.regions[facet.second].label),
                            point: x,
                            values: (va, vb),
                        },
                    ));
                }
            }
            violations.extend(worst.map(|(_, v)| v));
        }
        Ok(ContinuityReport {
            facets_checked: facets.len(),
            points_checked,
            violations,
        })
    }

    /// Decides whether the function has a CPLR representation: across each
    /// boundary hyperplane every neighbouring Jacobian jump must be the same
    /// multiple of the hyperplane normal, and no region may be cut by a
    /// hyperplane that carries a non-zero jump.
    pub fn check_consistent_variation(&self) -> Result<VariationVerdict> {
        let report = self.check_continuity(8)?;
        if !report.is_continuous() {
            return Err(PwlError::Discontinuous {
                violations: report.violations.len(),
            });
        }
        self.variation_verdict(&self.facets()?)
    }

    fn variation_verdict(&self, facets: &[Facet]) -> Result<VariationVerdict> {
        let centers: Vec<Vec<f64>> = (0..self.regions.len())
            .map(|i| {
                self.region_center(i)?
                    .map(|(c, _)| c)
                    .ok_or_else(|| PwlError::InvalidModel(format!("region {} is empty", self.regions[i].label)))
            })
            .collect::<Result<_>>()?;

        let mut boundaries: Vec<BoundaryJump> = Vec::new();
        let mut certificate = None;
        for facet in facets {
            let plane = &facet.hyperplane;
            let (pos, neg) = if plane.value(&centers[facet.first]) > 0.0 {
                (facet.first, facet.second)
            } else {
                (facet.second, facet.first)
            };
            let jump = self.pieces[pos].sub(&self.pieces[neg]);
            let c = dot(&jump.jacobian, &plane.normal);
            let off_normal: Vec<f64> = jump
                .jacobian
                .iter()
                .zip(&plane.normal)
                .map(|(d, n)| d - c * n)
                .collect();
            if norm(&off_normal) > MATCH_TOL * (1.0 + norm(&jump.jacobian)) && certificate.is_none() {
                certificate = Some(format!(
                    "jacobian jump between regions {} and {} is not parallel to the normal of {}",
                    self.regions[pos].label, self.regions[neg].label, plane
                ));
            }
            match boundaries.iter_mut().find(|b| b.hyperplane.matches(plane)) {
                Some(b) => b.pairs.push((pos, neg, c)),
                None => boundaries.push(BoundaryJump {
                    hyperplane: plane.clone(),
                    coefficient: None,
                    pairs: vec![(pos, neg, c)],
                }),
            }
        }

        for b in &mut boundaries {
            let c0 = b.pairs[0].2;
            let consistent = b
                .pairs
                .iter()
                .all(|(_, _, c)| (c - c0).abs() <= MATCH_TOL * 1f64.max(c.abs()).max(c0.abs()));
            if consistent {
                b.coefficient = Some(c0);
            } else if certificate.is_none() {
                let listed: Vec<String> = b
                    .pairs
                    .iter()
                    .map(|(p, q, c)| format!("{}|{}: {}", self.regions[*p].label, self.regions[*q].label, fmt_real(*c)))
                    .collect();
                certificate = Some(format!(
                    "inconsistent variation across {}: jump coefficients {}",
                    b.hyperplane,
                    listed.join(", ")
                ));
            }
        }

        // A hyperplane with a non-zero jump must extend through the whole
        // domain, so no region may lie on both of its sides.
        if certificate.is_none() {
            'outer: for b in &boundaries {
                if b.coefficient.is_none_or(|c| c.abs() <= MATCH_TOL) {
                    continue;
                }
                let f = b.hyperplane.as_affine();
                for i in 0..self.regions.len() {
                    let hs = self.region_constraints(i);
                    let hi = lp::maximize(self.dim, &hs, &f)?.unwrap_or(f64::INFINITY);
                    let lo = -lp::maximize(self.dim, &hs, &f.scale(-1.0))?.unwrap_or(f64::INFINITY);
                    if hi > FACET_TOL && lo < -FACET_TOL {
                        certificate = Some(format!(
                            "boundary {} vanishes inside region {}",
                            b.hyperplane, self.regions[i].label
                        ));
                        break 'outer;
                    }
                }
            }
        }

        Ok(VariationVerdict {
            representable: certificate.is_none(),
            boundaries,
            certificate,
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("pwl-conventional v1 dim={} pieces={}\n", self.dim, self.pieces.len());
        if let Some(d) = &self.domain {
            out.push_str("domain\n");
            for h in &d.halfspaces {
                push_halfspace(&mut out, h);
            }
        }
        for (r, p) in self.regions.iter().zip(&self.pieces) {
            out.push_str(&format!("J={} b={} label={}\n", fmt_reals(&p.jacobian), fmt_real(p.bias), r.label));
            for h in &r.halfspaces {
                push_halfspace(&mut out, h);
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut reader = Reader::new(text);
        let (head, fields) = header(&mut reader, "conventional")?;
        let dim = fields.count("dim")?;
        let count = fields.count("pieces")?;
        let mut domain = None;
        if reader.peek().is_some_and(|l| l.text.trim() == "domain") {
            reader.next_line("domain")?;
            domain = Some(Region::new(read_halfspaces(&mut reader, dim)?, 0));
        }
        let mut regions = Vec::with_capacity(count);
        let mut pieces = Vec::with_capacity(count);
        for k in 0..count {
            let line = reader.next_line("piece line `J=... b=...`")?;
            let f = line.fields();
            let jac = f.reals("J")?;
            expect_dim(&line, "J", jac.len(), dim)?;
            let label = if f.has("label") { f.count("label")? } else { k + 1 };
            pieces.push(AffineFunction::new(jac, f.real("b")?));
            regions.push(Region::new(read_halfspaces(&mut reader, dim)?, label));
        }
        reader.finish()?;
        Self::new(dim, regions, pieces, domain).map_err(|e| head.error(1, e.to_string()))
    }
}

fn push_halfspace(out: &mut String, h: &Halfspace) {
    out.push_str(&format!(
        "H: normal={} offset={} closed={}\n",
        fmt_reals(&h.normal),
        fmt_real(h.offset),
        u8::from(h.closed)
    ));
}

fn read_halfspaces(reader: &mut Reader<'_>, dim: usize) -> Result<Vec<Halfspace>> {
    let mut out = Vec::new();
    while let Some(line) = reader.peek().cloned() {
        let f = line.fields();
        if f.word(0) != Some("H:") {
            break;
        }
        reader.next_line("halfspace")?;
        out.push(parse_halfspace(&line, dim)?);
    }
    Ok(out)
}

fn parse_halfspace(line: &Line<'_>, dim: usize) -> Result<Halfspace> {
    let f = line.fields();
    let normal = f.reals("normal")?;
    expect_dim(line, "normal", normal.len(), dim)?;
    Halfspace::new(normal, f.real("offset")?, f.flag("closed")?).map_err(|e| line.error(1, e.to_string()))
}

/// Points spread over the relative interior of a facet: the center plus
/// random chords through it clipped to the facet.
fn sample_facet(facet: &Facet, count: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = facet.center.len();
    let mut out = vec![facet.center.clone()];
    if n < 2 {
        return out;
    }
    while out.len() < count {
        let mut d: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let along = dot(&d, &facet.hyperplane.normal);
        d.iter_mut()
            .zip(&facet.hyperplane.normal)
            .for_each(|(v, nv)| *v -= along * nv);
        let len = norm(&d);
        if len < 1e-12 {
            continue;
        }
        d.iter_mut().for_each(|v| *v /= len);
        let reach = |dir: f64| {
            let mut s = SAMPLE_REACH;
            for h in &facet.constraints {
                let rate = dir * dot(&h.normal, &d);
                if rate < 0.0 {
                    s = s.min(h.value(&facet.center).max(0.0) / -rate);
                }
            }
            s
        };
        let (fwd, back) = (reach(1.0), reach(-1.0));
        let t: f64 = rng.random_range(0.0..1.0);
        let step = (1.0 - 1e-6) * (-back + t * (fwd + back));
        out.push(facet.center.iter().zip(&d).map(|(c, v)| c + step * v).collect());
    }
    out
}

impl PwlFunction for ConventionalPwl {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64]) -> Result<f64> {
        ConventionalPwl::eval(self, x)
    }

    fn lipschitz_bound(&self) -> f64 {
        self.pieces.iter().map(|p| norm(&p.jacobian)).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn two_piece_evaluation_and_boundary() {
        let m = catalog::two_piece_3d();
        assert_eq!(m.eval(&[0.0, 0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(m.eval(&[-1.0, 0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(m.eval(&[-3.0, 0.0, 0.0]).unwrap(), 2.0);
    }

    #[test]
    fn five_piece_value_on_flat_piece() {
        let m = catalog::five_piece();
        assert_eq!(m.eval(&[2.5]).unwrap(), 2.0);
    }

    #[test]
    fn coverage_gap_carries_point() {
        let m = catalog::five_piece();
        assert_eq!(m.eval(&[6.0]), Err(PwlError::CoverageGap { point: vec![6.0] }));
    }

    #[test]
    fn boundary_ties_resolve_to_lowest_label() {
        let m = catalog::five_piece();
        assert_eq!(m.locate(&[1.0]).unwrap(), 0);
        assert_eq!(m.locate(&[1.5]).unwrap(), 1);
    }

    #[test]
    fn continuity_examples() {
        assert!(catalog::two_piece_3d().check_continuity(16).unwrap().is_continuous());
        assert!(catalog::five_piece().check_continuity(4).unwrap().is_continuous());

        let report = catalog::five_piece_broken().check_continuity(4).unwrap();
        assert_eq!(report.violations.len(), 2);
        let mut at: Vec<_> = report.violations.iter().map(|v| v.point[0]).collect();
        at.sort_by(f64::total_cmp);
        assert!((at[0] - 1.8).abs() < 1e-9 && (at[1] - 3.2).abs() < 1e-9);
        let v18 = report.violations.iter().find(|v| (v.point[0] - 1.8).abs() < 1e-9).unwrap();
        assert!((v18.values.0 - 2.6).abs() < 1e-9 && (v18.values.1 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn consistent_variation_examples() {
        let v = catalog::two_piece_3d().check_consistent_variation().unwrap();
        assert!(v.representable);
        assert_eq!(v.boundaries.len(), 1);
        // J1 - J2 = [2,-2,2] = 2·[1,-1,1] = 2√3 · unit normal
        let c = v.boundaries[0].coefficient.unwrap();
        assert!((c - 2.0 * 3f64.sqrt()).abs() < 1e-9);

        let v = catalog::ridge_conventional().check_consistent_variation().unwrap();
        assert!(!v.representable);
        assert!(v.certificate.unwrap().contains("inconsistent"));

        let single = ConventionalPwl::affine(AffineFunction::new(vec![1.0, 2.0], 3.0), None);
        assert!(single.check_consistent_variation().unwrap().representable);
    }

    #[test]
    fn discontinuous_input_rejected_by_variation_check() {
        assert!(matches!(
            catalog::five_piece_broken().check_consistent_variation(),
            Err(PwlError::Discontinuous { violations: 2 })
        ));
    }

    #[test]
    fn ridge_facets_skip_the_apex_contact() {
        let facets = catalog::ridge_conventional().facets().unwrap();
        // Ω1|Ω2 and Ω3a|Ω3b on x1 = x2, plus Ω1|Ω3a and Ω2|Ω3b on the two ridges.
        assert_eq!(facets.len(), 4);
    }

    #[test]
    fn text_round_trip() {
        for m in [catalog::two_piece_3d(), catalog::five_piece_broken(), catalog::ridge_conventional()] {
            let back = ConventionalPwl::from_text(&m.to_text()).unwrap();
            assert_eq!(back, m);
        }
    }

    #[test]
    fn malformed_text_reports_position() {
        let err = ConventionalPwl::from_text("pwl-conventional v1 dim=1 pieces=1\nJ=1 b=zz\n").unwrap_err();
        assert!(matches!(err, PwlError::Parse { line: 2, column: 5, .. }));
    }
}

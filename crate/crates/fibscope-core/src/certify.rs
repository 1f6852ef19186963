//! Fibration certificates: generic rank of the leading forms, the
//! critical-point probe, and the asymptotic-set verdict combined into a
//! graded conclusion.
//!
//! Certificates are evidence, not proofs. The grading runs on the
//! geometric engine only: an empty estimated asymptotic set supports
//! `B(G) = ∅` through the inclusion `B(G) ⊂ S_G`; a persistent cluster
//! is reported as the candidate obstruction.

use crate::mapspec::{ChartExpr, MappingSpec};
use crate::numeric::asymptotic::{RadiusSchedule, Verdict};
use crate::numeric::cluster::Cluster;
use crate::numeric::k0::{k0_probe, K0Report};
use crate::numeric::rank::complex_rank;
use crate::numeric::rng::{normal, substream, StreamKind};
use crate::numeric::NumericError;
use crate::poly::mixed::CompiledPoly;
use crate::poly::{PolyError, PolyMap};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

/// Generic complex rank of the Jacobian of the leading forms.
#[derive(Clone, Debug, Serialize)]
pub struct LeadingRankReport {
    pub rank: usize,
    /// `n - rank`; the generic dimension of the common zero set of the
    /// leading forms.
    pub corank: usize,
    pub trials: usize,
    pub seed: u64,
}

/// Maximum rank of `D(Ĝ_i)` over random complex points; with probability
/// one this is the generic rank.
pub fn leading_rank(map: &PolyMap, seed: u64, trials: usize) -> Result<LeadingRankReport, PolyError> {
    let forms = map.leading_forms()?;
    let n = map.source_dim();
    let jac: Vec<Vec<CompiledPoly>> = forms
        .iter()
        .map(|f| {
            (0..n)
                .map(|j| CompiledPoly::from_poly(&f.wirtinger(j, false)))
                .collect()
        })
        .collect();
    let mut rank = 0;
    let trials = trials.max(1);
    for t in 0..trials {
        let mut rng = substream(seed, StreamKind::LeadingRank, 0, t as u64);
        let z: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(normal(&mut rng), normal(&mut rng)))
            .collect();
        let m = DMatrix::from_fn(n - 1, n, |r, c| jac[r][c].eval(&z));
        rank = rank.max(complex_rank(&m, 1e-8));
    }
    Ok(LeadingRankReport {
        rank,
        corank: n - rank,
        trials,
        seed,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConclusionGrade {
    /// No critical point found and no persistent asymptotic cluster.
    FibrationEvidence,
    /// A persistent asymptotic cluster was witnessed.
    ObstructionWitnessed,
    Inconclusive,
}

/// Structured verdict for one mapping and weight choice.
#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub n: usize,
    pub theorem_track: String,
    /// For n >= 4 this is `leading_rank > n-3`; smaller n carries no
    /// rank hypothesis.
    pub hypothesis_met: bool,
    pub leading: LeadingRankReport,
    pub k0_evidence: K0Report,
    pub sg_verdict: Verdict,
    pub sg_clusters: Vec<Cluster>,
    pub conclusion: ConclusionGrade,
    pub conclusion_text: String,
    pub seed: u64,
}

/// Grading rule; factored out so its soundness can be property-tested.
///
/// `FibrationEvidence` requires both an empty probe and an empty
/// asymptotic verdict; a nonempty verdict always reports the witness.
pub fn grade_conclusion(k0_found_nothing: bool, sg: Verdict) -> ConclusionGrade {
    match sg {
        Verdict::Nonempty => ConclusionGrade::ObstructionWitnessed,
        Verdict::Empty if k0_found_nothing => ConclusionGrade::FibrationEvidence,
        _ => ConclusionGrade::Inconclusive,
    }
}

fn conclusion_text(grade: ConclusionGrade, clusters: &[Cluster]) -> String {
    match grade {
        ConclusionGrade::FibrationEvidence => "evidence for B(G) = empty (G a fibration): \
             no critical point found and the estimated asymptotic set S_G is empty; \
             B(G) is contained in S_G"
            .into(),
        ConclusionGrade::ObstructionWitnessed => {
            let witness = clusters
                .first()
                .map(|c| format!("{:?}", c.center))
                .unwrap_or_else(|| "<none>".into());
            format!(
                "obstruction witnessed: the estimated asymptotic set S_G is nonempty \
                 (candidate value near {witness}); S_G contains B(G) and a nonempty S_G \
                 is the engine of the obstruction"
            )
        }
        ConclusionGrade::Inconclusive => {
            "inconclusive: the evidence gathered at these budgets neither supports \
             an empty asymptotic set nor exhibits a persistent cluster"
                .into()
        }
    }
}

/// Default attempt budget for the critical-point probe inside
/// [`certify`].
pub const CERTIFY_K0_ATTEMPTS: usize = 2000;
/// Default trial budget for [`leading_rank`] inside [`certify`].
pub const CERTIFY_RANK_TRIALS: usize = 32;

/// Runs the probe, the leading-rank test and the asymptotic estimation,
/// and assembles the graded certificate. Estimation failures downgrade
/// the conclusion to inconclusive instead of aborting.
pub fn certify(
    spec: &MappingSpec,
    schedule: &RadiusSchedule,
    seed: u64,
) -> Result<Certificate, NumericError> {
    schedule.validate()?;
    let n = spec.n;
    let k0 = k0_probe(&spec.map, seed, CERTIFY_K0_ATTEMPTS)?;
    let leading = leading_rank(&spec.map, seed, CERTIFY_RANK_TRIALS)
        .map_err(|e| NumericError::InvalidParameter(e.to_string()))?;

    let (theorem_track, hypothesis_met) = match n {
        2 => ("n=2 (inclusion B(G) in S_G only)".to_string(), true),
        3 => ("n=3".to_string(), true),
        _ => (
            "n>=4".to_string(),
            leading.rank > n.saturating_sub(3),
        ),
    };

    let (sg_verdict, sg_clusters, estimation_note) =
        match crate::numeric::asymptotic::estimate_asymptotic_set(spec, schedule, seed) {
            Ok(report) => (report.verdict, report.clusters, None),
            Err(e) => (Verdict::Inconclusive, Vec::new(), Some(e.to_string())),
        };

    let mut grade = grade_conclusion(k0.found_nothing(), sg_verdict);
    if !hypothesis_met && grade == ConclusionGrade::FibrationEvidence {
        // Without the rank hypothesis the fibration reading is not
        // backed by the framework; keep the evidence but do not grade
        // it as (a).
        grade = ConclusionGrade::Inconclusive;
    }
    let mut text = conclusion_text(grade, &sg_clusters);
    if let Some(note) = estimation_note {
        text.push_str(&format!(" [estimation error: {note}]"));
    }
    Ok(Certificate {
        n,
        theorem_track,
        hypothesis_met,
        leading,
        k0_evidence: k0,
        sg_verdict,
        sg_clusters,
        conclusion: grade,
        conclusion_text: text,
        seed,
    })
}

/// A chart function with its decay normalization `psi / (1+|x|^2)^N`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormalizedChart {
    #[serde(serialize_with = "serialize_chart")]
    pub base: ChartExpr,
    pub decay_exponent: u32,
    /// Set when the declared exponent cannot force decay at infinity
    /// (growth degree of the chart is not below `2N`).
    pub insufficient_decay: bool,
}

fn serialize_chart<S: serde::Serializer>(c: &ChartExpr, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&c.to_string())
}

impl NormalizedChart {
    /// Evaluates `psi(x) / (1+|x|^2)^N` at a complex point, given the
    /// value of `phi` and of `|x|^2`.
    pub fn eval(&self, z: &[Complex64], phi: f64, x_norm_sqr: f64) -> Complex64 {
        let v = self.base.eval_c64(z, phi);
        if self.decay_exponent == 0 {
            v
        } else {
            v / (1.0 + x_norm_sqr).powi(self.decay_exponent as i32)
        }
    }
}

/// Wraps a chart in the decay normalization. With `N = 0` the chart is
/// passed through unchanged (for charts that already decay). The result
/// is flagged when the chart's growth degree is not below `2N`.
pub fn decay_normalize(chart: &ChartExpr, decay_exponent: u32) -> NormalizedChart {
    let deg = chart.degree_bound();
    let insufficient_decay = match deg {
        None => false, // identically zero decays trivially
        Some(d) => d - 2 * decay_exponent as i64 >= 0,
    };
    NormalizedChart {
        base: chart.clone(),
        decay_exponent,
        insufficient_decay,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapspec::parse_mapping;

    #[test]
    fn leading_rank_of_suspension_is_two() {
        let map = parse_mapping("n=3; G1 = z + z^2*w; G2 = zeta; rho = 0,1,0")
            .unwrap()
            .map;
        for seed in 0..10 {
            let r = leading_rank(&map, seed, 16).unwrap();
            assert_eq!(r.rank, 2);
            assert_eq!(r.corank, 1);
        }
    }

    #[test]
    fn leading_rank_of_broughton_is_one() {
        let map = parse_mapping("n=2; G1 = z + z^2*w; rho = 0,1").unwrap().map;
        for seed in 0..10 {
            let r = leading_rank(&map, seed, 16).unwrap();
            assert_eq!(r.rank, 1);
            assert_eq!(r.corank, 1);
        }
    }

    #[test]
    fn proportional_leading_forms_have_rank_one() {
        let map = parse_mapping("n=3; G1 = z1^2 + z2; G2 = 2*z1^2 - z3; rho = 1,0,0")
            .unwrap()
            .map;
        // leading forms are z1^2 and 2 z1^2
        let r = leading_rank(&map, 5, 16).unwrap();
        assert_eq!(r.rank, 1);
    }

    #[test]
    fn grading_is_sound() {
        use Verdict::*;
        assert_eq!(
            grade_conclusion(true, Empty),
            ConclusionGrade::FibrationEvidence
        );
        assert_eq!(
            grade_conclusion(false, Empty),
            ConclusionGrade::Inconclusive
        );
        assert_eq!(
            grade_conclusion(true, Nonempty),
            ConclusionGrade::ObstructionWitnessed
        );
        assert_eq!(
            grade_conclusion(true, Inconclusive),
            ConclusionGrade::Inconclusive
        );
    }

    #[test]
    fn decay_normalization_flags() {
        use crate::mapspec::ChartExpr as C;
        // constant chart with N = 1 is fine
        let c = decay_normalize(&C::Const(crate::rational::CRat::one()), 1);
        assert!(!c.insufficient_decay);
        let v = c.eval(&[Complex64::new(3.0, 4.0)], 1.0, 25.0);
        assert!((v.re - 1.0 / 26.0).abs() < 1e-15);

        // phi passthrough with N = 0
        let c = decay_normalize(&C::Phi, 0);
        assert!(!c.insufficient_decay);

        // degree-4 chart with N = 1 cannot decay
        let z4 = C::Pow(Box::new(C::Var(0)), 4);
        let c = decay_normalize(&z4, 1);
        assert!(c.insufficient_decay);
    }

    #[test]
    fn sign_is_preserved_by_decay_normalization() {
        use crate::mapspec::ChartExpr as C;
        // psi = x-part of z1 (real polynomial on the realified space)
        let psi = C::Add(
            Box::new(C::Var(0)),
            Box::new(C::Conj(0)),
        ); // z1 + conj(z1) = 2 Re z1
        let norm = decay_normalize(&psi, 2);
        let mut rng = substream(11, StreamKind::Generic, 0, 0);
        for _ in 0..10_000 {
            let z = [
                Complex64::new(3.0 * normal(&mut rng), 3.0 * normal(&mut rng)),
                Complex64::new(3.0 * normal(&mut rng), 3.0 * normal(&mut rng)),
            ];
            let x2 = z[0].norm_sqr() + z[1].norm_sqr();
            let raw = psi.eval_c64(&z, 1.0);
            let scaled = norm.eval(&z, 1.0, x2);
            assert_eq!(raw.re.signum(), scaled.re.signum());
        }
    }
}

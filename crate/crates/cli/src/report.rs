//! Report documents and their JSON/CSV renderings.

use std::fmt::Write;

use hdbsm_core::{
    AuditReference, AuditSource, BellIndex, Classification, ConventionFinding, DiscrepancyReport,
    IndexLaw, PhaseConvention,
};
use hdbsm_core::decomposition::PhaseClosedForm;
use serde::Serialize;

/// Bumped on any change to the report layout.
pub const SCHEMA_VERSION: &str = "1.0.0";

#[derive(Debug, Serialize)]
pub struct ReportDocument {
    pub schema_version: &'static str,
    pub command: &'static str,
    pub config: ConfigEcho,
    pub payload: Payload,
    pub checks: Vec<Check>,
    pub passed: bool,
}

#[derive(Debug, Serialize)]
pub struct ConfigEcho {
    pub d: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub i: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j: Option<usize>,
    pub convention: ConventionEcho,
    pub seed: u64,
    pub shots: u64,
    pub format: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub purity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state_file: Option<String>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConventionEcho {
    pub bell_sign: i8,
    pub decomp_sign: i8,
    /// `auto`, `explicit`, or `default` (d = 2 without a flag).
    pub mode: &'static str,
}

impl ConventionEcho {
    pub fn convention(&self) -> PhaseConvention {
        PhaseConvention {
            bell_sign: self.bell_sign,
            decomp_sign: self.decomp_sign,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &'static str, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name,
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BellEcho {
    pub i: usize,
    pub j: usize,
}

impl From<BellIndex> for BellEcho {
    fn from(b: BellIndex) -> Self {
        Self { i: b.i, j: b.j }
    }
}

#[derive(Debug, Serialize)]
pub struct DecompEntry {
    pub k: usize,
    pub m: usize,
    pub k_prime: usize,
    pub m_prime: usize,
    pub re: f64,
    pub im: f64,
    pub magnitude: f64,
    /// Phase as `exp(2πi·r/d)`; null when the phase is not a d-th root of unity.
    pub phase_r: Option<usize>,
}

#[derive(Debug, Serialize)]
pub struct PhaseEntry {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub m: usize,
    pub k_prime: usize,
    pub r: usize,
}

#[derive(Debug, Serialize)]
pub struct PhaseLawEcho {
    pub closed_form: Option<PhaseClosedForm>,
    pub entries: Vec<PhaseEntry>,
}

#[derive(Debug, Serialize)]
pub struct AuditGroup {
    pub convention: PhaseConvention,
    pub reports: Vec<DiscrepancyReport>,
}

#[derive(Debug, Serialize)]
pub struct ProbabilityEntry {
    pub k: usize,
    pub m: usize,
    pub k_prime: usize,
    pub m_prime: usize,
    pub probability: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<u64>,
}

#[derive(Debug, Serialize)]
pub struct ClassProbability {
    pub i: usize,
    pub j: usize,
    pub probability: f64,
}

#[derive(Debug, Serialize)]
pub struct ClassificationEcho {
    pub bell: BellEcho,
    pub confidence: f64,
    pub tie: bool,
    pub tied: Vec<BellEcho>,
    pub class_probabilities: Vec<ClassProbability>,
    pub unreachable_mass: f64,
}

impl From<&Classification> for ClassificationEcho {
    fn from(c: &Classification) -> Self {
        let d = c.bell.d;
        Self {
            bell: c.bell.into(),
            confidence: c.confidence,
            tie: c.tie,
            tied: c.tied.iter().map(|&b| b.into()).collect(),
            class_probabilities: c
                .class_probabilities
                .iter()
                .enumerate()
                .map(|(o, &probability)| ClassProbability {
                    i: o / d,
                    j: o % d,
                    probability,
                })
                .collect(),
            unreachable_mass: c.unreachable_mass,
        }
    }
}

#[derive(Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    Decomposition {
        bell: BellEcho,
        entries: Vec<DecompEntry>,
        total_probability: f64,
        /// Whether every support tuple follows k′ = (d−1)(k + i), m′ = m + j.
        claimed_law_holds: bool,
    },
    Verification {
        survey: Vec<ConventionFinding>,
        matching_convention: Option<PhaseConvention>,
        index_law: IndexLaw,
        phase_law: PhaseLawEcho,
        class_sizes: Vec<usize>,
        audits: Vec<AuditGroup>,
    },
    Simulation {
        bell: BellEcho,
        entries: Vec<ProbabilityEntry>,
        max_deviation: f64,
        classification: ClassificationEcho,
        sampled_classification: Option<ClassificationEcho>,
        unreachable_counts: Option<u64>,
    },
    Classification {
        input_norm: f64,
        classification: ClassificationEcho,
    },
}

fn convention_tag(c: PhaseConvention) -> String {
    c.to_string()
}

fn source_tag(s: &AuditSource) -> &'static str {
    match s {
        AuditSource::TableRow { .. } => "table_row",
        AuditSource::Psi23Listing => "psi23_listing",
        AuditSource::ClaimedLaw { .. } => "claimed_law",
    }
}

fn reference_tag(r: &AuditReference) -> String {
    match *r {
        AuditReference::Computed { bell_sign, decomp_sign } => format!(
            "computed{}",
            convention_tag(PhaseConvention { bell_sign, decomp_sign })
        ),
        AuditReference::ClaimedLaw => "claimed_law".into(),
    }
}

impl ReportDocument {
    pub fn new(command: &'static str, config: ConfigEcho, payload: Payload, checks: Vec<Check>) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        Self {
            schema_version: SCHEMA_VERSION,
            command,
            config,
            payload,
            checks,
            passed,
        }
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// One `# key=value` comment line, a column header, then rows. Floats use
    /// the shortest round-trip form, switching to exponent notation when tiny.
    pub fn to_csv(&self) -> String {
        let c = &self.config;
        let mut out = format!(
            "# schema_version={} command={} d={} convention={} mode={} seed={} shots={} passed={}",
            self.schema_version,
            self.command,
            c.d,
            convention_tag(c.convention.convention()),
            c.convention.mode,
            c.seed,
            c.shots,
            self.passed
        );
        if let (Some(i), Some(j)) = (c.i, c.j) {
            let _ = write!(out, " i={i} j={j}");
        }
        if let Some(p) = c.purity {
            let _ = write!(out, " purity={p}");
        }
        out.push('\n');
        match &self.payload {
            Payload::Decomposition { entries, .. } => {
                out.push_str("k,m,k_prime,m_prime,re,im,magnitude,phase_r\n");
                for e in entries {
                    let r = e.phase_r.map(|r| r.to_string()).unwrap_or_default();
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{:?},{:?},{:?},{}",
                        e.k, e.m, e.k_prime, e.m_prime, e.re, e.im, e.magnitude, r
                    );
                }
            }
            Payload::Verification { audits, .. } => {
                out.push_str("convention,source,reference,status,i,j,k,m,k_prime,m_prime\n");
                for group in audits {
                    let conv = convention_tag(group.convention);
                    for report in &group.reports {
                        let prefix = format!(
                            "{conv},{},{}",
                            source_tag(&report.source),
                            reference_tag(&report.reference)
                        );
                        let rows = report
                            .matches
                            .iter()
                            .map(|t| ("match", t))
                            .chain(report.mismatches.iter().map(|m| ("mismatch", &m.printed)))
                            .chain(report.duplicates.iter().map(|t| ("duplicate", t)));
                        for (status, t) in rows {
                            let [k, m, k2, m2] = t.pair.digits();
                            let _ = writeln!(
                                out,
                                "{prefix},{status},{},{},{k},{m},{k2},{m2}",
                                t.bell.i, t.bell.j
                            );
                        }
                    }
                }
            }
            Payload::Simulation { entries, .. } => {
                let sampled = entries.first().is_some_and(|e| e.count.is_some());
                out.push_str("k,m,k_prime,m_prime,probability");
                out.push_str(if sampled { ",count\n" } else { "\n" });
                for e in entries {
                    let _ = write!(out, "{},{},{},{},{:?}", e.k, e.m, e.k_prime, e.m_prime, e.probability);
                    if let Some(n) = e.count {
                        let _ = write!(out, ",{n}");
                    }
                    out.push('\n');
                }
            }
            Payload::Classification { classification, .. } => {
                out.push_str("i,j,probability\n");
                for p in &classification.class_probabilities {
                    let _ = writeln!(out, "{},{},{:?}", p.i, p.j, p.probability);
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(checks: Vec<Check>) -> ReportDocument {
        let config = ConfigEcho {
            d: 2,
            i: None,
            j: None,
            convention: ConventionEcho {
                bell_sign: 1,
                decomp_sign: 1,
                mode: "default",
            },
            seed: 0,
            shots: 0,
            format: "csv",
            purity: Some(0.5),
            state_file: None,
        };
        let payload = Payload::Classification {
            input_norm: 1.0,
            classification: ClassificationEcho {
                bell: BellEcho { i: 0, j: 0 },
                confidence: 1.0,
                tie: false,
                tied: vec![BellEcho { i: 0, j: 0 }],
                class_probabilities: vec![ClassProbability { i: 0, j: 0, probability: 1e-20 }],
                unreachable_mass: 0.0,
            },
        };
        ReportDocument::new("classify", config, payload, checks)
    }

    #[test]
    fn any_failed_check_fails_the_report() {
        assert!(doc(vec![Check::new("a", true, "")]).passed);
        assert!(!doc(vec![Check::new("a", true, ""), Check::new("b", false, "")]).passed);
    }

    #[test]
    fn csv_header_and_tiny_floats() {
        let csv = doc(vec![]).to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(
            lines[0],
            "# schema_version=1.0.0 command=classify d=2 convention=(+,+) mode=default seed=0 shots=0 passed=true purity=0.5"
        );
        assert_eq!(lines[1], "i,j,probability");
        assert_eq!(lines[2], "0,0,1e-20");
    }
}

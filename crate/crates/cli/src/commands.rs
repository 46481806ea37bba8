//! The four subcommands, each producing a [`ReportDocument`].

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use anyhow::Context;
use hdbsm_core::decomposition::{self, fit_phase_law, phase_integer};
use hdbsm_core::{
    audit_paper_tables, build_decoding_table, classify_table, coincidence_probabilities,
    convention_survey, decompose_all, find_convention, fit_index_law, run_experiment,
    BellIndex, CoincidenceTable, DecompositionTable, IndexLaw, PhaseConvention,
};

use crate::report::{
    AuditGroup, Check, ConfigEcho, ConventionEcho, DecompEntry, Payload,
    PhaseEntry, PhaseLawEcho, ProbabilityEntry, ReportDocument,
};
use crate::{state_file, usage, ConventionArg, Format};

/// Tolerance for probability-level comparisons.
const EQUIVALENCE_TOL: f64 = 1e-9;
/// Probabilities at or below this are omitted from coincidence tables.
const ZERO_PROBABILITY: f64 = 1e-12;

fn resolve_convention(d: usize, arg: Option<ConventionArg>) -> anyhow::Result<ConventionEcho> {
    let explicit = |bell_sign, decomp_sign| ConventionEcho {
        bell_sign,
        decomp_sign,
        mode: "explicit",
    };
    Ok(match arg {
        None if d == 2 => ConventionEcho {
            mode: "default",
            ..explicit(1, 1)
        },
        None | Some(ConventionArg::Auto) => {
            if d == 2 {
                return Err(usage(
                    "--convention auto is not available at d=2: every convention gives the same tables",
                ));
            }
            let (conv, _) = find_convention(d).context("no convention reproduces the claimed law")?;
            ConventionEcho {
                bell_sign: conv.bell_sign,
                decomp_sign: conv.decomp_sign,
                mode: "auto",
            }
        }
        Some(ConventionArg::Literal | ConventionArg::Pp) => explicit(1, 1),
        Some(ConventionArg::Pm) => explicit(1, -1),
        Some(ConventionArg::Mp) => explicit(-1, 1),
        Some(ConventionArg::Mm) => explicit(-1, -1),
    })
}

fn bell_index(d: usize, i: usize, j: usize) -> anyhow::Result<BellIndex> {
    BellIndex::new(d, i, j).map_err(|_| usage(format!("-i {i} -j {j} must both be below d={d}")))
}

fn config(d: usize, convention: ConventionEcho, format: Format) -> ConfigEcho {
    ConfigEcho {
        d,
        i: None,
        j: None,
        convention,
        seed: 0,
        shots: 0,
        format: format.name(),
        purity: None,
        state_file: None,
    }
}

fn table_entries(d: usize, table: &DecompositionTable) -> Vec<DecompEntry> {
    table
        .entries
        .iter()
        .map(|(pair, c)| {
            let [k, m, k_prime, m_prime] = pair.digits();
            DecompEntry {
                k,
                m,
                k_prime,
                m_prime,
                re: c.re,
                im: c.im,
                magnitude: c.norm(),
                phase_r: phase_integer(*c, d).ok(),
            }
        })
        .collect()
}

pub fn decompose(
    d: usize,
    i: usize,
    j: usize,
    conv: Option<ConventionArg>,
    format: Format,
) -> anyhow::Result<ReportDocument> {
    let bell = bell_index(d, i, j)?;
    let echo = resolve_convention(d, conv)?;
    let table = decomposition::decompose(bell, echo.convention());

    let violations = table.violations();
    let claimed = IndexLaw::claimed(d).support(bell).into_iter().collect::<BTreeSet<_>>();
    let claimed_law_holds = table.support() == claimed;
    let fidelity = hdbsm_core::inner_product(
        &table.reconstruct(),
        &hdbsm_core::hyperentangled_state(bell, echo.convention()),
    )?
    .norm();

    let checks = vec![
        Check::new(
            "structure",
            violations.is_empty(),
            if violations.is_empty() {
                format!("{} entries of magnitude 1/{d}, m' = m + j", table.entries.len())
            } else {
                violations.join("; ")
            },
        ),
        Check::new(
            "reconstruction",
            (fidelity - 1.0).abs() <= EQUIVALENCE_TOL,
            format!("fidelity {fidelity}"),
        ),
    ];
    let payload = Payload::Decomposition {
        bell: bell.into(),
        entries: table_entries(d, &table),
        total_probability: table.total_probability(),
        claimed_law_holds,
    };
    let mut cfg = config(d, echo, format);
    cfg.i = Some(i);
    cfg.j = Some(j);
    Ok(ReportDocument::new("decompose", cfg, payload, checks))
}

pub fn verify(d: usize, conv: Option<ConventionArg>, format: Format) -> anyhow::Result<ReportDocument> {
    let echo = resolve_convention(d, conv)?;
    let used = echo.convention();
    let survey = convention_survey(d)?;
    let matching_convention = survey.iter().find(|f| f.matches_claim).map(|f| f.convention);

    let tables = decompose_all(d, used)?;
    let mut violations: Vec<String> = tables.iter().flat_map(|t| t.violations()).collect();
    let mut seen = BTreeSet::new();
    for t in &tables {
        for pair in t.entries.keys() {
            if !seen.insert(*pair) {
                violations.push(format!("outcome {pair} appears in two expansions"));
            }
        }
    }
    if seen.len() != d.pow(4) {
        violations.push(format!("supports cover {} of {} outcomes", seen.len(), d.pow(4)));
    }
    let index_law = fit_index_law(&tables)?;
    let phase_law = fit_phase_law(&tables)?;
    let decoding = build_decoding_table(d, used)?;

    let mut audit_conventions = vec![used];
    if used != PhaseConvention::LITERAL {
        audit_conventions.push(PhaseConvention::LITERAL);
    }
    let audits = audit_conventions
        .into_iter()
        .map(|c| {
            Ok(AuditGroup {
                convention: c,
                reports: audit_paper_tables(d, c)?,
            })
        })
        .collect::<anyhow::Result<Vec<_>>>()?;

    let checks = vec![
        Check::new(
            "structure",
            violations.is_empty(),
            if violations.is_empty() {
                format!("{} expansions with disjoint supports covering all outcomes", tables.len())
            } else {
                violations.join("; ")
            },
        ),
        Check::new(
            "decoding_partition",
            decoding.is_partition(),
            format!("class sizes {:?}", decoding.class_sizes()),
        ),
        Check::new(
            "matching_convention",
            matching_convention.is_some(),
            match matching_convention {
                Some(c) => format!("{c} gives s = t = {}", d - 1),
                None => format!("no convention gives s = t = {}", d - 1),
            },
        ),
    ];
    let payload = Payload::Verification {
        survey,
        matching_convention,
        index_law,
        phase_law: PhaseLawEcho {
            closed_form: phase_law.closed_form,
            entries: phase_law
                .table
                .iter()
                .map(|(key, &(r, k_prime))| PhaseEntry {
                    i: key.i,
                    j: key.j,
                    k: key.k,
                    m: key.m,
                    k_prime,
                    r,
                })
                .collect(),
        },
        class_sizes: decoding.class_sizes(),
        audits,
    };
    Ok(ReportDocument::new("verify", config(d, echo, format), payload, checks))
}

pub fn simulate(
    d: usize,
    i: usize,
    j: usize,
    shots: u64,
    seed: u64,
    conv: Option<ConventionArg>,
    format: Format,
) -> anyhow::Result<ReportDocument> {
    let bell = bell_index(d, i, j)?;
    let echo = resolve_convention(d, conv)?;
    let run = run_experiment(d, i, j, shots, seed, echo.convention())?;
    let decoding = build_decoding_table(d, echo.convention())?;
    let theory = classify_table(&run.detector_table, &decoding)?;

    let (sampled, unreachable_counts) = match &run.record {
        Some(rec) => {
            let table = CoincidenceTable::new(d, rec.frequencies())?;
            let (_, lost) = rec.class_counts(&decoding);
            (Some(classify_table(&table, &decoding)?), Some(lost))
        }
        None => (None, None),
    };
    let entries = run
        .detector_table
        .entries()
        .filter(|&(_, p)| p > ZERO_PROBABILITY)
        .map(|(pair, probability)| {
            let [k, m, k_prime, m_prime] = pair.digits();
            ProbabilityEntry {
                k,
                m,
                k_prime,
                m_prime,
                probability,
                count: run.record.as_ref().map(|r| r.count(pair)),
            }
        })
        .collect();

    let mut checks = vec![
        Check::new(
            "equivalence",
            run.equivalent(EQUIVALENCE_TOL),
            format!("max |P_optical − P_abstract| = {:e}", run.max_deviation),
        ),
        Check::new(
            "classification",
            theory.bell == bell && !theory.tie,
            format!("decoded {} with confidence {}", theory.bell, theory.confidence),
        ),
    ];
    if let Some(lost) = unreachable_counts {
        checks.push(Check::new(
            "no_undecodable_counts",
            lost == 0,
            format!("{lost} counts on undecodable outcomes"),
        ));
    }

    let payload = Payload::Simulation {
        bell: bell.into(),
        entries,
        max_deviation: run.max_deviation,
        classification: (&theory).into(),
        sampled_classification: sampled.as_ref().map(Into::into),
        unreachable_counts,
    };
    let mut cfg = config(d, echo, format);
    cfg.i = Some(i);
    cfg.j = Some(j);
    cfg.seed = seed;
    cfg.shots = shots;
    Ok(ReportDocument::new("simulate", cfg, payload, checks))
}

pub fn classify(
    path: &Path,
    purity: f64,
    conv: Option<ConventionArg>,
    format: Format,
) -> anyhow::Result<ReportDocument> {
    if !(0.0..=1.0).contains(&purity) {
        return Err(usage(format!("--purity {purity} must lie in [0, 1]")));
    }
    let text = fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let parsed = state_file::parse(&text)?;
    let d = parsed.state.shape().radices()[0];
    let echo = resolve_convention(d, conv)?;

    let table = coincidence_probabilities(&parsed.state, echo.convention())?;
    let table = if purity < 1.0 {
        table.with_white_noise(purity)?
    } else {
        table
    };
    let decoding = build_decoding_table(d, echo.convention())?;
    let c = classify_table(&table, &decoding)?;
    let total: f64 = c.class_probabilities.iter().sum::<f64>() + c.unreachable_mass;

    let checks = vec![Check::new(
        "probability_total",
        (total - 1.0).abs() <= EQUIVALENCE_TOL,
        format!("class probabilities sum to {total}"),
    )];
    let payload = Payload::Classification {
        input_norm: parsed.norm,
        classification: (&c).into(),
    };
    let mut cfg = config(d, echo, format);
    cfg.purity = Some(purity);
    cfg.state_file = Some(path.display().to_string());
    Ok(ReportDocument::new("classify", cfg, payload, checks))
}

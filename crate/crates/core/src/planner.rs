//! Concatenated distillation planning.
//!
//! One subroutine level consumes magic states at error rate `p` and
//! yields `k/n · P_s(p)` states at rate `q(p)` per input, so a sequence
//! of protocols multiplies cost factors `n / (k P_s)` while composing the
//! error maps. The optimizer enumerates sequences up to a round limit
//! with branch-and-bound pruning; every cost factor exceeds one, so a
//! prefix at or above the incumbent cost can never recover.
//!
//! Protocols are either matrix-derived (rates bound to exact enumerator
//! evaluations, worst case over logical qubits) or external, with
//! polynomial rate functions loaded from a config file.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::analysis::{self, AnalysisError, Rates};
use crate::ortho::TriorthogonalMatrix;
use crate::FloatPoly;

#[derive(Debug, Error)]
pub enum PlannerError {
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("protocol needs at least one logical qubit and distance >= 2 (distance = {distance})")]
    DistanceTooSmall { distance: usize },
    #[error("no sequence of at most {max_rounds} rounds reaches error rate {target:e}")]
    Unreachable { target: f64, max_rounds: usize },
    #[error("protocol library is empty")]
    EmptyLibrary,
    #[error("unknown protocol name {name:?}")]
    UnknownProtocol { name: String },
    #[error("invalid protocol definition: {0}")]
    InvalidProtocol(String),
    #[error("config parse error at line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("scaling exponent needs a matrix-derived protocol with known distance")]
    UnknownDistance,
}

#[derive(Debug, Clone)]
enum RateModel {
    Matrix(Rates),
    Polynomial { q: FloatPoly, ps: FloatPoly },
}

/// A distillation subroutine abstracted to its counts and rate maps.
#[derive(Debug, Clone)]
pub struct ProtocolSpec {
    name: String,
    n: usize,
    k: usize,
    distance: Option<usize>,
    rates: RateModel,
}

impl ProtocolSpec {
    /// Binds the rate maps to exact enumerator evaluations of `g`.
    /// Rejects matrices whose induced protocol cannot improve anything
    /// (no logical qubits or distance below 2).
    pub fn from_matrix(g: &TriorthogonalMatrix, name: &str) -> Result<Self, PlannerError> {
        if g.k() == 0 {
            return Err(PlannerError::InvalidProtocol(
                "matrix has no odd-weight rows".into(),
            ));
        }
        let distance = analysis::distance_z(g)?;
        if distance < 2 {
            return Err(PlannerError::DistanceTooSmall { distance });
        }
        Ok(Self {
            name: name.to_string(),
            n: g.n(),
            k: g.k(),
            distance: Some(distance),
            rates: RateModel::Matrix(Rates::new(g)?),
        })
    }

    /// An externally specified protocol with polynomial rate functions
    /// (ascending coefficients in `p`).
    pub fn external(
        name: &str,
        n: usize,
        k: usize,
        q: FloatPoly,
        ps: FloatPoly,
    ) -> Result<Self, PlannerError> {
        if k == 0 || n <= k {
            return Err(PlannerError::InvalidProtocol(format!(
                "need n > k >= 1, got n = {n}, k = {k}"
            )));
        }
        Ok(Self {
            name: name.to_string(),
            n,
            k,
            distance: None,
            rates: RateModel::Polynomial { q, ps },
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn distance(&self) -> Option<usize> {
        self.distance
    }

    /// Where the rate functions come from.
    pub fn provenance(&self) -> &'static str {
        match &self.rates {
            RateModel::Matrix(_) => "matrix-derived",
            RateModel::Polynomial { .. } => "external-config",
        }
    }

    /// Worst-case output error map.
    pub fn q(&self, p: f64) -> f64 {
        match &self.rates {
            RateModel::Matrix(rates) => rates.output_error_max(p),
            RateModel::Polynomial { q, .. } => q.eval(&p),
        }
    }

    /// Acceptance probability map, clamped into (0, 1] so cost factors
    /// stay above one even for sloppy external polynomials.
    pub fn success_probability(&self, p: f64) -> f64 {
        let raw = match &self.rates {
            RateModel::Matrix(rates) => rates.success_probability(p),
            RateModel::Polynomial { ps, .. } => ps.eval(&p),
        };
        raw.clamp(f64::MIN_POSITIVE, 1.0)
    }

    /// Cost factor `n / (k P_s(p))` of one round at input rate `p`.
    pub fn cost_factor(&self, p: f64) -> f64 {
        self.n as f64 / (self.k as f64 * self.success_probability(p))
    }

    /// Largest input rate this protocol improves on, if any.
    pub fn threshold(&self) -> Option<f64> {
        analysis::threshold_from_rates(|p| self.q(p)).ok()
    }

    /// `log(n/k) / log(d)`; requires a known distance of at least 2.
    pub fn scaling_exponent(&self) -> Result<f64, PlannerError> {
        let d = self.distance.ok_or(PlannerError::UnknownDistance)?;
        if d < 2 {
            return Err(PlannerError::DistanceTooSmall { distance: d });
        }
        Ok((self.n as f64 / self.k as f64).ln() / (d as f64).ln())
    }
}

/// The built-in protocol library: the 15-qubit code ("15"), the family
/// members ("2" through "40" for even k), and the 49-qubit code ("49").
pub fn builtin_library() -> Vec<ProtocolSpec> {
    let mut lib = Vec::new();
    let rm15 = crate::ortho::builtin("RM15").expect("builtin");
    lib.push(ProtocolSpec::from_matrix(&rm15, "15").expect("15-qubit protocol"));
    for k in (2..=40).step_by(2) {
        let g = crate::ortho::generate_gk(k).expect("family member");
        lib.push(ProtocolSpec::from_matrix(&g, &k.to_string()).expect("family protocol"));
    }
    let bh49 = crate::ortho::builtin("BH49").expect("builtin");
    lib.push(ProtocolSpec::from_matrix(&bh49, "49").expect("49-qubit protocol"));
    lib
}

/// One level of an evaluated plan.
#[derive(Debug, Clone, Serialize)]
pub struct LevelReport {
    pub protocol: String,
    pub p_in: f64,
    pub p_out: f64,
    pub success_probability: f64,
    pub cost_factor: f64,
}

/// A concatenation sequence with its per-level rates and total cost.
#[derive(Debug, Clone, Serialize)]
pub struct DistillationPlan {
    pub sequence: Vec<String>,
    pub levels: Vec<LevelReport>,
    pub final_error: f64,
    pub total_cost: f64,
    /// Some level failed to reduce the error rate.
    pub diverging: bool,
    /// The input rate sits at or above the first protocol's threshold.
    pub input_above_threshold: bool,
}

impl DistillationPlan {
    pub fn sequence_label(&self) -> String {
        if self.sequence.is_empty() {
            "(none)".into()
        } else {
            self.sequence.join("-")
        }
    }
}

/// Applies the cost recursion level by level.
pub fn evaluate_sequence(seq: &[&ProtocolSpec], p0: f64) -> DistillationPlan {
    let mut p = p0;
    let mut cost = 1.0;
    let mut levels = Vec::with_capacity(seq.len());
    let mut diverging = false;
    for proto in seq {
        let ps = proto.success_probability(p);
        let factor = proto.cost_factor(p);
        let p_next = proto.q(p);
        if p_next >= p {
            diverging = true;
        }
        levels.push(LevelReport {
            protocol: proto.name().to_string(),
            p_in: p,
            p_out: p_next,
            success_probability: ps,
            cost_factor: factor,
        });
        cost *= factor;
        p = p_next;
    }
    let input_above_threshold = match seq.first() {
        Some(first) => first.threshold().is_none_or(|th| p0 >= th),
        None => false,
    };
    DistillationPlan {
        sequence: seq.iter().map(|s| s.name().to_string()).collect(),
        levels,
        final_error: p,
        total_cost: cost,
        diverging,
        input_above_threshold,
    }
}

/// Minimizes total cost over sequences of at most `max_rounds` library
/// protocols whose final error reaches `eps_target`, by exhaustive
/// depth-first enumeration with cost pruning. Ties break toward shorter
/// sequences, then lexicographic names.
pub fn optimize(
    p0: f64,
    eps_target: f64,
    max_rounds: usize,
    library: &[ProtocolSpec],
) -> Result<DistillationPlan, PlannerError> {
    if library.is_empty() {
        return Err(PlannerError::EmptyLibrary);
    }
    struct Dfs<'a> {
        library: &'a [ProtocolSpec],
        eps: f64,
        max_rounds: usize,
        best: Option<(f64, Vec<usize>)>,
    }
    impl Dfs<'_> {
        fn visit(&mut self, seq: &mut Vec<usize>, p: f64, cost: f64) {
            if p <= self.eps {
                let better = match &self.best {
                    Some((best_cost, best_seq)) => {
                        cost < *best_cost
                            || (cost == *best_cost
                                && (seq.len() < best_seq.len()
                                    || (seq.len() == best_seq.len()
                                        && self.names(seq) < self.names(best_seq))))
                    }
                    None => true,
                };
                if better {
                    self.best = Some((cost, seq.clone()));
                }
                // Extending a feasible prefix only multiplies by factors
                // above one.
                return;
            }
            if seq.len() == self.max_rounds {
                return;
            }
            for i in 0..self.library.len() {
                let proto = &self.library[i];
                let new_cost = cost * proto.cost_factor(p);
                if let Some((best_cost, _)) = &self.best {
                    if new_cost > *best_cost {
                        continue;
                    }
                }
                let p_next = proto.q(p);
                if !p_next.is_finite() {
                    continue;
                }
                seq.push(i);
                self.visit(seq, p_next, new_cost);
                seq.pop();
            }
        }

        fn names(&self, seq: &[usize]) -> Vec<&str> {
            seq.iter().map(|&i| self.library[i].name()).collect()
        }
    }
    let mut dfs = Dfs {
        library,
        eps: eps_target,
        max_rounds,
        best: None,
    };
    dfs.visit(&mut Vec::new(), p0, 1.0);
    let (_, indices) = dfs.best.ok_or(PlannerError::Unreachable {
        target: eps_target,
        max_rounds,
    })?;
    let refs: Vec<&ProtocolSpec> = indices.iter().map(|&i| &library[i]).collect();
    Ok(evaluate_sequence(&refs, p0))
}

/// One row of a cost table.
#[derive(Debug, Clone, Serialize)]
pub struct TableRow {
    pub target_exponent: f64,
    pub plan: Option<DistillationPlan>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CostTable {
    pub p0: f64,
    pub max_rounds: usize,
    pub rows: Vec<TableRow>,
}

/// Optimizes one row per target error rate; unreachable targets produce
/// rows with no plan.
pub fn emit_table(
    p0: f64,
    targets: &[f64],
    max_rounds: usize,
    library: &[ProtocolSpec],
) -> Result<CostTable, PlannerError> {
    if library.is_empty() {
        return Err(PlannerError::EmptyLibrary);
    }
    let rows = targets
        .iter()
        .map(|&eps| TableRow {
            target_exponent: -eps.log10(),
            plan: optimize(p0, eps, max_rounds, library).ok(),
        })
        .collect();
    Ok(CostTable {
        p0,
        max_rounds,
        rows,
    })
}

impl CostTable {
    /// CSV with columns `target_exponent,sequence,achieved_exponent,cost`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("target_exponent,sequence,achieved_exponent,cost\n");
        for row in &self.rows {
            match &row.plan {
                Some(plan) => {
                    let _ = writeln!(
                        out,
                        "{},{},{},{}",
                        row.target_exponent,
                        plan.sequence_label(),
                        -plan.final_error.log10(),
                        plan.total_cost
                    );
                }
                None => {
                    let _ = writeln!(out, "{},unreachable,,", row.target_exponent);
                }
            }
        }
        out
    }
}

/// Parses the external-protocol config format: blank-line-separated
/// stanzas of `protocol <name>`, `n <int>`, `k <int>`, and `q`/`ps`
/// lines listing polynomial coefficients in ascending powers of `p`.
/// `#` starts a comment.
pub fn parse_protocol_config(text: &str) -> Result<Vec<ProtocolSpec>, PlannerError> {
    struct Partial {
        name: Option<String>,
        n: Option<usize>,
        k: Option<usize>,
        q: Option<Vec<f64>>,
        ps: Option<Vec<f64>>,
        line: usize,
    }
    let mut protocols = Vec::new();
    let mut partial: Option<Partial> = None;

    let mut finish = |partial: &mut Option<Partial>| -> Result<(), PlannerError> {
        let Some(stanza) = partial.take() else {
            return Ok(());
        };
        let fail = |message: &str| PlannerError::Config {
            line: stanza.line,
            message: message.to_string(),
        };
        let name = stanza.name.ok_or_else(|| fail("missing `protocol` line"))?;
        let n = stanza.n.ok_or_else(|| fail("missing `n`"))?;
        let k = stanza.k.ok_or_else(|| fail("missing `k`"))?;
        let q = stanza.q.ok_or_else(|| fail("missing `q` coefficients"))?;
        let ps = stanza.ps.ok_or_else(|| fail("missing `ps` coefficients"))?;
        protocols.push(ProtocolSpec::external(
            &name,
            n,
            k,
            FloatPoly::from_coeffs(q),
            FloatPoly::from_coeffs(ps),
        )?);
        Ok(())
    };

    for (idx, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            finish(&mut partial)?;
            continue;
        }
        let err = |message: String| PlannerError::Config {
            line: idx + 1,
            message,
        };
        let mut fields = line.split_whitespace();
        let key = fields.next().expect("nonempty line");
        let rest: Vec<&str> = fields.collect();
        let stanza = partial.get_or_insert_with(|| Partial {
            name: None,
            n: None,
            k: None,
            q: None,
            ps: None,
            line: idx + 1,
        });
        match key {
            "protocol" => {
                let [name] = rest.as_slice() else {
                    return Err(err("expected `protocol <name>`".into()));
                };
                stanza.name = Some((*name).to_string());
            }
            "n" | "k" => {
                let [value] = rest.as_slice() else {
                    return Err(err(format!("expected `{key} <integer>`")));
                };
                let value: usize = value
                    .parse()
                    .map_err(|_| err(format!("bad integer {value:?}")))?;
                if key == "n" {
                    stanza.n = Some(value);
                } else {
                    stanza.k = Some(value);
                }
            }
            "q" | "ps" => {
                let coeffs: Result<Vec<f64>, _> =
                    rest.iter().map(|v| v.parse::<f64>()).collect();
                let coeffs =
                    coeffs.map_err(|_| err(format!("bad coefficient list for `{key}`")))?;
                if key == "q" {
                    stanza.q = Some(coeffs);
                } else {
                    stanza.ps = Some(coeffs);
                }
            }
            other => return Err(err(format!("unknown key {other:?}"))),
        }
    }
    finish(&mut partial)?;
    Ok(protocols)
}

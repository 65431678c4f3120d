//! Effort, cost and categorical KPIs of matching solutions and experiments,
//! decision matrices, and user-defined aggregation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Read;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::PairMetric;
use crate::scalar::Scalar;

/// Hours of expert work plus the expert's skill level (0 untrained, 100 highly skilled).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EffortEntry {
    pub hr_amount: f64,
    pub expertise: u8,
}

impl EffortEntry {
    pub fn new(hr_amount: f64, expertise: u8) -> Result<Self> {
        let entry = EffortEntry {
            hr_amount,
            expertise,
        };
        entry.validate()?;
        Ok(entry)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.hr_amount.is_finite() && self.hr_amount >= 0.0) {
            return Err(Error::Value(format!(
                "hr amount must be a non-negative number, got {}",
                self.hr_amount
            )));
        }
        if self.expertise > 100 {
            return Err(Error::Value(format!(
                "expertise must be within 0..=100, got {}",
                self.expertise
            )));
        }
        Ok(())
    }
}

macro_rules! kpi_enum {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(rename_all = "camelCase")]
        pub enum $name { $($variant),+ }

        impl FromStr for $name {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s.trim().to_ascii_lowercase().replace(['-', '_', ' '], "").as_str() {
                    $(t if t == $text.to_ascii_lowercase() => Ok($name::$variant),)+
                    _ => Err(Error::Value(format!("unknown {} `{}`", stringify!($name), s))),
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $($name::$variant => $text),+ })
            }
        }
    };
}

kpi_enum!(DeploymentType { OnPremise => "onPremise", Cloud => "cloud" });
kpi_enum!(Interface { Gui => "gui", Api => "api", Cli => "cli" });
kpi_enum!(Technique {
    RuleBased => "ruleBased",
    Clustering => "clustering",
    Probabilistic => "probabilistic",
    Ml => "ml",
    Other => "other",
});

/// Lifecycle expenditures and categorical KPIs of a matching solution.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct SolutionKpis {
    pub general_costs: Option<f64>,
    pub integration_effort: Option<EffortEntry>,
    pub domain_config_effort: Option<EffortEntry>,
    pub technique_config_effort: Option<EffortEntry>,
    pub deployment_type: BTreeSet<DeploymentType>,
    pub interfaces: BTreeSet<Interface>,
    pub techniques: BTreeSet<Technique>,
}

impl SolutionKpis {
    pub fn validate(&self) -> Result<()> {
        if let Some(c) = self.general_costs {
            if !(c.is_finite() && c >= 0.0) {
                return Err(Error::Value(format!("general costs must be non-negative, got {c}")));
            }
        }
        self.efforts().try_for_each(|e| e.validate())
    }

    fn efforts(&self) -> impl Iterator<Item = &EffortEntry> {
        [
            &self.integration_effort,
            &self.domain_config_effort,
            &self.technique_config_effort,
        ]
        .into_iter()
        .flatten()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct ExperimentKpis {
    pub setup_effort: Option<EffortEntry>,
    pub runtime_seconds: Option<f64>,
}

impl ExperimentKpis {
    pub fn validate(&self) -> Result<()> {
        if let Some(r) = self.runtime_seconds {
            if !(r.is_finite() && r >= 0.0) {
                return Err(Error::Value(format!("runtime must be non-negative, got {r}")));
            }
        }
        self.setup_effort.iter().try_for_each(|e| e.validate())
    }
}

/// Hourly rate as a piecewise-linear function of expertise, clamped at the
/// outermost points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "Vec<(T, T)>",
    into = "Vec<(T, T)>",
    bound(deserialize = "T: Scalar + Deserialize<'de>", serialize = "T: Scalar + Serialize")
)]
pub struct RateTable<T> {
    points: Vec<(T, T)>,
}

impl<T: Scalar> TryFrom<Vec<(T, T)>> for RateTable<T> {
    type Error = Error;
    fn try_from(points: Vec<(T, T)>) -> Result<Self> {
        RateTable::new(points)
    }
}

impl<T> From<RateTable<T>> for Vec<(T, T)> {
    fn from(table: RateTable<T>) -> Self {
        table.points
    }
}

impl<T: Scalar> RateTable<T> {
    pub fn flat(rate: T) -> Self {
        RateTable {
            points: vec![(T::zero(), rate)],
        }
    }

    /// `(expertise, rate)` points; sorted on construction.
    pub fn new(mut points: Vec<(T, T)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("rate table needs at least one point".into()));
        }
        if points
            .iter()
            .any(|&(x, r)| !x.is_finite() || !r.is_finite() || r < T::zero())
        {
            return Err(Error::InvalidArgument(
                "rate table points must be finite with non-negative rates".into(),
            ));
        }
        points.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite"));
        Ok(RateTable { points })
    }

    pub fn rate(&self, expertise: T) -> T {
        let pts = &self.points;
        if expertise <= pts[0].0 {
            return pts[0].1;
        }
        for w in pts.windows(2) {
            let ((x0, r0), (x1, r1)) = (w[0], w[1]);
            if expertise <= x1 {
                if x1 == x0 {
                    return r1;
                }
                return r0 + (r1 - r0) * (expertise - x0) / (x1 - x0);
            }
        }
        pts[pts.len() - 1].1
    }
}

impl<T: Scalar> Default for RateTable<T> {
    fn default() -> Self {
        RateTable::flat(T::one())
    }
}

/// Monetary estimate: hours times the rate at the entry's expertise.
pub fn effort_cost<T: Scalar>(entry: &EffortEntry, rate: &RateTable<T>) -> T {
    T::from_f64_lossy(entry.hr_amount) * rate.rate(T::from_count(u64::from(entry.expertise)))
}

/// Quality figures of one experiment, computed by the caller against a gold standard.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExperimentQuality {
    pub experiment_id: String,
    pub solution_id: Option<String>,
    pub metrics: BTreeMap<PairMetric, Option<f64>>,
}

/// Which metrics appear in the decision matrix and which one picks the
/// representative experiment of each solution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct MetricSelection {
    pub metrics: Vec<PairMetric>,
    pub best_by: PairMetric,
}

impl Default for MetricSelection {
    fn default() -> Self {
        MetricSelection {
            metrics: vec![PairMetric::Precision, PairMetric::Recall, PairMetric::F1],
            best_by: PairMetric::F1,
        }
    }
}

/// Solution identity as far as the decision matrix is concerned.
#[derive(Clone, Debug, PartialEq)]
pub struct SolutionRef<'a> {
    pub id: &'a str,
    pub name: &'a str,
    pub kpis: &'a SolutionKpis,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DecisionRow {
    pub solution_id: String,
    pub solution_name: String,
    pub general_costs: Option<f64>,
    pub integration_hours: Option<f64>,
    pub domain_config_hours: Option<f64>,
    pub technique_config_hours: Option<f64>,
    pub effort_hours: Option<f64>,
    pub effort_cost: Option<f64>,
    pub total_cost: Option<f64>,
    pub deployment_type: BTreeSet<DeploymentType>,
    pub interfaces: BTreeSet<Interface>,
    pub techniques: BTreeSet<Technique>,
    pub experiment_count: usize,
    pub best_experiment: Option<String>,
    pub quality: BTreeMap<PairMetric, Option<f64>>,
}

fn sum_present(values: impl IntoIterator<Item = Option<f64>>) -> Option<f64> {
    values
        .into_iter()
        .flatten()
        .fold(None, |acc, v| Some(acc.unwrap_or(0.0) + v))
}

/// One row per solution, KPIs next to the quality of its best experiment.
pub fn decision_matrix(
    solutions: &[SolutionRef<'_>],
    experiments: &[ExperimentQuality],
    selection: &MetricSelection,
    rate: &RateTable<f64>,
) -> Vec<DecisionRow> {
    solutions
        .iter()
        .map(|s| {
            let k = s.kpis;
            let efforts = [
                k.integration_effort,
                k.domain_config_effort,
                k.technique_config_effort,
            ];
            let effort_hours = sum_present(efforts.iter().map(|e| e.map(|e| e.hr_amount)));
            let effort_cost = sum_present(efforts.iter().map(|e| e.map(|e| effort_cost(&e, rate))));
            let own: Vec<&ExperimentQuality> = experiments
                .iter()
                .filter(|e| e.solution_id.as_deref() == Some(s.id))
                .collect();
            let best = own
                .iter()
                .copied()
                .filter(|e| e.metrics.get(&selection.best_by).copied().flatten().is_some())
                .min_by(|a, b| {
                    let score = |e: &ExperimentQuality| e.metrics[&selection.best_by].unwrap();
                    score(b)
                        .total_cmp(&score(a))
                        .then_with(|| a.experiment_id.cmp(&b.experiment_id))
                });
            let quality = selection
                .metrics
                .iter()
                .map(|&m| (m, best.and_then(|e| e.metrics.get(&m).copied().flatten())))
                .collect();
            DecisionRow {
                solution_id: s.id.to_owned(),
                solution_name: s.name.to_owned(),
                general_costs: k.general_costs,
                integration_hours: k.integration_effort.map(|e| e.hr_amount),
                domain_config_hours: k.domain_config_effort.map(|e| e.hr_amount),
                technique_config_hours: k.technique_config_effort.map(|e| e.hr_amount),
                effort_hours,
                effort_cost,
                total_cost: sum_present([k.general_costs, effort_cost]),
                deployment_type: k.deployment_type.clone(),
                interfaces: k.interfaces.clone(),
                techniques: k.techniques.clone(),
                experiment_count: own.len(),
                best_experiment: best.map(|e| e.experiment_id.clone()),
                quality,
            }
        })
        .collect()
}

/// A decision-matrix column usable in an aggregation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Term {
    GeneralCosts,
    EffortHours,
    EffortCost,
    TotalCost,
    Metric(PairMetric),
}

impl Term {
    pub fn value(&self, row: &DecisionRow) -> Option<f64> {
        match self {
            Term::GeneralCosts => row.general_costs,
            Term::EffortHours => row.effort_hours,
            Term::EffortCost => row.effort_cost,
            Term::TotalCost => row.total_cost,
            Term::Metric(m) => row.quality.get(m).copied().flatten(),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::GeneralCosts => f.write_str("generalCosts"),
            Term::EffortHours => f.write_str("effortHours"),
            Term::EffortCost => f.write_str("effortCost"),
            Term::TotalCost => f.write_str("totalCost"),
            Term::Metric(m) => write!(f, "metric:{m}"),
        }
    }
}

impl FromStr for Term {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(metric) = s.strip_prefix("metric:") {
            return Ok(Term::Metric(metric.parse()?));
        }
        match s {
            "generalCosts" => Ok(Term::GeneralCosts),
            "effortHours" => Ok(Term::EffortHours),
            "effortCost" => Ok(Term::EffortCost),
            "totalCost" => Ok(Term::TotalCost),
            other => other
                .parse::<PairMetric>()
                .map(Term::Metric)
                .map_err(|_| Error::InvalidArgument(format!("unknown aggregation term `{s}`"))),
        }
    }
}

impl TryFrom<String> for Term {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Term> for String {
    fn from(t: Term) -> Self {
        t.to_string()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedTerm<T> {
    pub term: Term,
    pub weight: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AggregationSpec<T: Scalar> {
    #[serde(default)]
    pub rate: RateTable<T>,
    pub terms: Vec<WeightedTerm<T>>,
}

/// Weighted sum of min-max normalized terms, one score per row.
///
/// Normalization runs over the compared rows; a term that is constant
/// across the rows normalizes to 0.
pub fn aggregate<T: Scalar>(spec: &AggregationSpec<T>, rows: &[DecisionRow]) -> Result<Vec<T>> {
    if spec.terms.iter().any(|t| !t.weight.is_finite()) {
        return Err(Error::InvalidArgument("aggregation weights must be finite".into()));
    }
    let mut scores = vec![T::zero(); rows.len()];
    for wt in &spec.terms {
        let values = rows
            .iter()
            .map(|r| wt.term.value(r).map(T::from_f64_lossy))
            .collect::<Option<Vec<T>>>()
            .ok_or_else(|| Error::MissingTerm(wt.term.to_string()))?;
        let lo = values.iter().copied().fold(T::infinity(), T::min);
        let hi = values.iter().copied().fold(T::neg_infinity(), T::max);
        for (score, v) in scores.iter_mut().zip(values) {
            let normalized = if hi > lo { (v - lo) / (hi - lo) } else { T::zero() };
            *score = *score + wt.weight * normalized;
        }
    }
    Ok(scores)
}

fn parse_opt_f64(field: &str, column: &str) -> Result<Option<f64>> {
    let field = field.trim();
    if field.is_empty() {
        return Ok(None);
    }
    field
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .map(Some)
        .ok_or_else(|| Error::Value(format!("column `{column}`: `{field}` is not a number")))
}

fn parse_effort(row: &BTreeMap<String, String>, prefix: &str) -> Result<Option<EffortEntry>> {
    let get = |suffix: &str| row.get(&format!("{prefix}_{suffix}")).map(String::as_str).unwrap_or("");
    let hours = parse_opt_f64(get("hours"), &format!("{prefix}_hours"))?;
    let expertise = parse_opt_f64(get("expertise"), &format!("{prefix}_expertise"))?;
    match (hours, expertise) {
        (None, None) => Ok(None),
        (Some(h), e) => {
            let e = e.unwrap_or(0.0);
            if e.fract() != 0.0 || !(0.0..=100.0).contains(&e) {
                return Err(Error::Value(format!("{prefix}_expertise must be an integer in 0..=100")));
            }
            EffortEntry::new(h, e as u8).map(Some)
        }
        (None, Some(_)) => Err(Error::Value(format!("{prefix}_expertise given without {prefix}_hours"))),
    }
}

fn parse_set<E: FromStr<Err = Error> + Ord>(field: Option<&String>) -> Result<BTreeSet<E>> {
    field
        .map(|f| f.split(';').filter(|s| !s.trim().is_empty()).map(str::parse).collect())
        .unwrap_or_else(|| Ok(BTreeSet::new()))
}

fn read_rows(reader: impl Read) -> Result<Vec<BTreeMap<String, String>>> {
    let mut csv = csv::ReaderBuilder::new().flexible(false).from_reader(reader);
    let headers = csv.headers()?.clone();
    csv.records()
        .map(|r| {
            let r = r?;
            Ok(headers.iter().map(str::to_owned).zip(r.iter().map(str::to_owned)).collect())
        })
        .collect()
}

/// Reads a solution KPI sheet. Columns: `name`, `general_costs`,
/// `{integration,domain_config,technique_config}_{hours,expertise}`, and
/// `deployment_type`, `interfaces`, `techniques` as `;`-separated lists.
pub fn read_solution_kpis_csv(reader: impl Read) -> Result<Vec<(String, SolutionKpis)>> {
    read_rows(reader)?
        .into_iter()
        .map(|row| {
            let name = row
                .get("name")
                .filter(|n| !n.trim().is_empty())
                .ok_or_else(|| Error::Schema("solution KPI sheet needs a `name` column".into()))?
                .trim()
                .to_owned();
            let kpis = SolutionKpis {
                general_costs: parse_opt_f64(
                    row.get("general_costs").map(String::as_str).unwrap_or(""),
                    "general_costs",
                )?,
                integration_effort: parse_effort(&row, "integration")?,
                domain_config_effort: parse_effort(&row, "domain_config")?,
                technique_config_effort: parse_effort(&row, "technique_config")?,
                deployment_type: parse_set(row.get("deployment_type"))?,
                interfaces: parse_set(row.get("interfaces"))?,
                techniques: parse_set(row.get("techniques"))?,
            };
            kpis.validate()?;
            Ok((name, kpis))
        })
        .collect()
}

/// Reads an experiment KPI sheet. Columns: `experiment` (id or name),
/// `setup_hours`, `setup_expertise`, `runtime_seconds`.
pub fn read_experiment_kpis_csv(reader: impl Read) -> Result<Vec<(String, ExperimentKpis)>> {
    read_rows(reader)?
        .into_iter()
        .map(|row| {
            let key = row
                .get("experiment")
                .filter(|n| !n.trim().is_empty())
                .ok_or_else(|| Error::Schema("experiment KPI sheet needs an `experiment` column".into()))?
                .trim()
                .to_owned();
            let kpis = ExperimentKpis {
                setup_effort: parse_effort(&row, "setup")?,
                runtime_seconds: parse_opt_f64(
                    row.get("runtime_seconds").map(String::as_str).unwrap_or(""),
                    "runtime_seconds",
                )?,
            };
            kpis.validate()?;
            Ok((key, kpis))
        })
        .collect()
}

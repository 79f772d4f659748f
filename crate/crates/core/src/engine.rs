//! Discrete-time stock-and-flow evaluator.
//!
//! Time advances in whole periods (one day each). In every period the
//! evaluator reads exogenous inputs, evaluates converters and flows in
//! dependency order, then integrates stocks:
//!
//! ```text
//! stock(p) = stock(p-1) + sum(inflows(p)) - sum(outflows(p)),  stock(0) = initial
//! ```
//!
//! An expression that references a stock at lag 0 sees the level entering
//! the period, `stock(p-1)`. A reference with lag `k >= 1` sees the value
//! recorded `k` periods earlier; before the first period that is the stock's
//! initial level, or zero for every other component.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::models::Family;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ComponentKind {
    Stock,
    Flow,
    Converter,
}

impl fmt::Display for ComponentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ComponentKind::Stock => "stock",
            ComponentKind::Flow => "flow",
            ComponentKind::Converter => "converter",
        })
    }
}

/// A dependency of a formula on another component's value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ref {
    pub name: String,
    pub lag: usize,
}

impl Ref {
    pub fn current(name: impl Into<String>) -> Self {
        Ref {
            name: name.into(),
            lag: 0,
        }
    }

    pub fn lagged(name: impl Into<String>, lag: usize) -> Self {
        Ref {
            name: name.into(),
            lag,
        }
    }
}

/// Pure function of the dependency values, passed in `deps` order.
pub type FormulaFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum Expression {
    /// Value comes from the model's exogenous series of the same name.
    Input,
    Constant(f64),
    Formula {
        /// Short human-readable description; part of the model digest.
        label: String,
        deps: Vec<Ref>,
        eval: FormulaFn,
    },
    Stock {
        initial: f64,
        inflows: Vec<String>,
        outflows: Vec<String>,
    },
}

impl fmt::Debug for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expression::Input => f.write_str("Input"),
            Expression::Constant(v) => f.debug_tuple("Constant").field(v).finish(),
            Expression::Formula { label, deps, .. } => f
                .debug_struct("Formula")
                .field("label", label)
                .field("deps", deps)
                .finish_non_exhaustive(),
            Expression::Stock {
                initial,
                inflows,
                outflows,
            } => f
                .debug_struct("Stock")
                .field("initial", initial)
                .field("inflows", inflows)
                .field("outflows", outflows)
                .finish(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ModelComponent {
    pub name: String,
    pub kind: ComponentKind,
    pub unit: String,
    pub expression: Expression,
}

impl ModelComponent {
    pub fn stock(
        name: impl Into<String>,
        unit: impl Into<String>,
        initial: f64,
        inflows: &[&str],
        outflows: &[&str],
    ) -> Self {
        ModelComponent {
            name: name.into(),
            kind: ComponentKind::Stock,
            unit: unit.into(),
            expression: Expression::Stock {
                initial,
                inflows: inflows.iter().map(|s| s.to_string()).collect(),
                outflows: outflows.iter().map(|s| s.to_string()).collect(),
            },
        }
    }

    pub fn input(name: impl Into<String>, kind: ComponentKind, unit: impl Into<String>) -> Self {
        ModelComponent {
            name: name.into(),
            kind,
            unit: unit.into(),
            expression: Expression::Input,
        }
    }

    pub fn constant(name: impl Into<String>, unit: impl Into<String>, value: f64) -> Self {
        ModelComponent {
            name: name.into(),
            kind: ComponentKind::Converter,
            unit: unit.into(),
            expression: Expression::Constant(value),
        }
    }

    pub fn formula<F>(
        name: impl Into<String>,
        kind: ComponentKind,
        unit: impl Into<String>,
        label: impl Into<String>,
        deps: Vec<Ref>,
        eval: F,
    ) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        ModelComponent {
            name: name.into(),
            kind,
            unit: unit.into(),
            expression: Expression::Formula {
                label: label.into(),
                deps,
                eval: Arc::new(eval),
            },
        }
    }
}

/// A complete, runnable model. Cheap to clone; formulas are shared.
#[derive(Debug, Clone)]
pub struct Model {
    id: String,
    horizon: usize,
    components: Vec<ModelComponent>,
    exogenous: BTreeMap<String, Vec<f64>>,
    pub(crate) family: Family,
}

impl Model {
    pub fn new(id: impl Into<String>, horizon: usize) -> Result<Self> {
        if horizon < 1 {
            return Err(Error::model("horizon must be at least one period"));
        }
        Ok(Model {
            id: id.into(),
            horizon,
            components: Vec::new(),
            exogenous: BTreeMap::new(),
            family: Family::Custom,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn components(&self) -> &[ModelComponent] {
        &self.components
    }

    pub fn component(&self, name: &str) -> Option<&ModelComponent> {
        self.components.iter().find(|c| c.name == name)
    }

    pub fn exogenous(&self) -> &BTreeMap<String, Vec<f64>> {
        &self.exogenous
    }

    pub fn add(&mut self, component: ModelComponent) -> Result<&mut Self> {
        if self.component(&component.name).is_some() {
            return Err(Error::model(format!(
                "duplicate component name '{}'",
                component.name
            )));
        }
        self.components.push(component);
        Ok(self)
    }

    /// Sets the per-period input series for an `Input` component. Entry `i`
    /// is the value for period `i + 1`.
    pub fn set_input(&mut self, name: impl Into<String>, series: Vec<f64>) -> &mut Self {
        self.exogenous.insert(name.into(), series);
        self
    }

    pub(crate) fn set_id(&mut self, id: impl Into<String>) {
        self.id = id.into();
    }

    /// SHA-256 over the model structure, constants and inputs. Formula
    /// bodies are represented by their labels.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.id.as_bytes());
        h.update((self.horizon as u64).to_le_bytes());
        for c in &self.components {
            h.update(b"\x00c");
            h.update(c.name.as_bytes());
            h.update(b"\x00");
            h.update(c.kind.to_string().as_bytes());
            h.update(b"\x00");
            h.update(c.unit.as_bytes());
            match &c.expression {
                Expression::Input => h.update(b"\x00input"),
                Expression::Constant(v) => {
                    h.update(b"\x00const");
                    h.update(v.to_bits().to_le_bytes());
                }
                Expression::Formula { label, deps, .. } => {
                    h.update(b"\x00formula");
                    h.update(label.as_bytes());
                    for d in deps {
                        h.update(b"\x00");
                        h.update(d.name.as_bytes());
                        h.update((d.lag as u64).to_le_bytes());
                    }
                }
                Expression::Stock {
                    initial,
                    inflows,
                    outflows,
                } => {
                    h.update(b"\x00stock");
                    h.update(initial.to_bits().to_le_bytes());
                    for i in inflows {
                        h.update(b"\x00+");
                        h.update(i.as_bytes());
                    }
                    for o in outflows {
                        h.update(b"\x00-");
                        h.update(o.as_bytes());
                    }
                }
            }
        }
        for (name, series) in &self.exogenous {
            h.update(b"\x00x");
            h.update(name.as_bytes());
            for v in series {
                h.update(v.to_bits().to_le_bytes());
            }
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub kind: ComponentKind,
    pub unit: String,
    /// `values[i]` is the value in period `i + 1`.
    pub values: Vec<f64>,
}

impl Series {
    pub fn at(&self, period: usize) -> Option<f64> {
        period
            .checked_sub(1)
            .and_then(|i| self.values.get(i))
            .copied()
    }

    pub fn last(&self) -> f64 {
        *self.values.last().expect("series has horizon >= 1 entries")
    }

    /// `(period, value)` pairs with 1-based periods.
    pub fn points(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values.iter().enumerate().map(|(i, &v)| (i + 1, v))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub model_id: String,
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub provenance: Provenance,
    pub horizon: usize,
    pub series: BTreeMap<String, Series>,
}

impl RunResult {
    pub fn series(&self, name: &str) -> Result<&Series> {
        self.series
            .get(name)
            .ok_or_else(|| Error::model(format!("run has no series named '{name}'")))
    }

    /// Value of `name` in `period` (1-based).
    pub fn value(&self, name: &str, period: usize) -> Result<f64> {
        self.series(name)?.at(period).ok_or_else(|| {
            Error::model(format!(
                "period {period} outside 1..={} for '{name}'",
                self.horizon
            ))
        })
    }

    pub fn final_value(&self, name: &str) -> Result<f64> {
        Ok(self.series(name)?.last())
    }

    /// True when both runs hold bit-for-bit identical series.
    pub fn bitwise_eq(&self, other: &RunResult) -> bool {
        self.series.len() == other.series.len()
            && self
                .series
                .iter()
                .zip(&other.series)
                .all(|((ka, a), (kb, b))| {
                    ka == kb
                        && a.values.len() == b.values.len()
                        && a.values
                            .iter()
                            .zip(&b.values)
                            .all(|(x, y)| x.to_bits() == y.to_bits())
                })
    }
}

enum Step {
    Input(usize),
    Constant(f64),
    Formula {
        deps: Vec<(usize, usize)>,
        eval: FormulaFn,
    },
}

struct StockPlan {
    index: usize,
    inflows: Vec<usize>,
    outflows: Vec<usize>,
}

/// Validated, index-resolved evaluation plan.
struct Plan {
    order: Vec<(usize, Step)>,
    stocks: Vec<StockPlan>,
    initial: Vec<f64>,
    is_stock: Vec<bool>,
    inputs: Vec<Vec<f64>>,
}

fn plan(model: &Model) -> Result<Plan> {
    let n = model.components.len();
    let mut index: HashMap<&str, usize> = HashMap::with_capacity(n);
    for (i, c) in model.components.iter().enumerate() {
        if index.insert(c.name.as_str(), i).is_some() {
            return Err(Error::model(format!(
                "duplicate component name '{}'",
                c.name
            )));
        }
    }
    let lookup = |owner: &str, name: &str| -> Result<usize> {
        index
            .get(name)
            .copied()
            .ok_or_else(|| Error::model(format!("'{owner}' references unknown component '{name}'")))
    };

    let is_stock: Vec<bool> = model
        .components
        .iter()
        .map(|c| c.kind == ComponentKind::Stock)
        .collect();
    let mut initial = vec![0.0; n];
    let mut stocks = Vec::new();
    let mut inputs = Vec::new();
    let mut steps: Vec<Option<Step>> = Vec::with_capacity(n);
    // Same-period edges between non-stock components: dependents[i] need i first.
    let mut dependents: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut indegree = vec![0usize; n];

    for (i, c) in model.components.iter().enumerate() {
        let stock_expr = matches!(c.expression, Expression::Stock { .. });
        if stock_expr != (c.kind == ComponentKind::Stock) {
            return Err(Error::model(format!(
                "component '{}' is a {} but has a {} expression",
                c.name,
                c.kind,
                if stock_expr { "stock" } else { "non-stock" }
            )));
        }
        match &c.expression {
            Expression::Stock {
                initial: init,
                inflows,
                outflows,
            } => {
                let resolve = |names: &[String]| -> Result<Vec<usize>> {
                    names
                        .iter()
                        .map(|f| {
                            let j = lookup(&c.name, f)?;
                            if model.components[j].kind != ComponentKind::Flow {
                                return Err(Error::model(format!(
                                    "stock '{}' is wired to '{}', which is a {} rather than a flow",
                                    c.name, f, model.components[j].kind
                                )));
                            }
                            Ok(j)
                        })
                        .collect()
                };
                initial[i] = *init;
                stocks.push(StockPlan {
                    index: i,
                    inflows: resolve(inflows)?,
                    outflows: resolve(outflows)?,
                });
                steps.push(None);
            }
            Expression::Input => {
                let series = model.exogenous.get(&c.name).ok_or_else(|| {
                    Error::model(format!("input '{}' has no exogenous series", c.name))
                })?;
                let mut series = series.clone();
                if series.len() < model.horizon {
                    log::warn!(
                        "input '{}' has {} entries for horizon {}; missing periods default to 0",
                        c.name,
                        series.len(),
                        model.horizon
                    );
                    series.resize(model.horizon, 0.0);
                }
                inputs.push(series);
                steps.push(Some(Step::Input(inputs.len() - 1)));
            }
            Expression::Constant(v) => steps.push(Some(Step::Constant(*v))),
            Expression::Formula { deps, eval, .. } => {
                let mut resolved = Vec::with_capacity(deps.len());
                for d in deps {
                    let j = lookup(&c.name, &d.name)?;
                    if d.lag == 0 && !is_stock[j] {
                        if j == i {
                            return Err(Error::model(format!(
                                "'{}' depends on itself within one period",
                                c.name
                            )));
                        }
                        dependents[j].push(i);
                        indegree[i] += 1;
                    }
                    resolved.push((j, d.lag));
                }
                steps.push(Some(Step::Formula {
                    deps: resolved,
                    eval: Arc::clone(eval),
                }));
            }
        }
    }

    // Kahn's algorithm; ties broken by declaration order so plans are stable.
    let mut ready: std::collections::BTreeSet<usize> = (0..n)
        .filter(|&i| !is_stock[i] && indegree[i] == 0)
        .collect();
    let mut order = Vec::with_capacity(n);
    while let Some(i) = ready.pop_first() {
        let step = steps[i].take().expect("non-stock components carry a step");
        order.push((i, step));
        for &k in &dependents[i] {
            indegree[k] -= 1;
            if indegree[k] == 0 {
                ready.insert(k);
            }
        }
    }
    let non_stock = is_stock.iter().filter(|s| !**s).count();
    if order.len() != non_stock {
        let cyclic: Vec<&str> = (0..n)
            .filter(|&i| !is_stock[i] && indegree[i] > 0)
            .map(|i| model.components[i].name.as_str())
            .collect();
        return Err(Error::model(format!(
            "cyclic dependencies among: {}",
            cyclic.join(", ")
        )));
    }

    Ok(Plan {
        order,
        stocks,
        initial,
        is_stock,
        inputs,
    })
}

/// Validates the model without running it.
pub fn validate(model: &Model) -> Result<()> {
    plan(model).map(|_| ())
}

pub fn run(model: &Model) -> Result<RunResult> {
    let plan = plan(model)?;
    let n = model.components.len();
    let horizon = model.horizon;
    let mut values = vec![vec![0.0f64; horizon]; n];
    let mut level = plan.initial.clone();
    let mut args = Vec::new();

    for p in 0..horizon {
        for (i, step) in &plan.order {
            let v = match step {
                Step::Input(k) => plan.inputs[*k][p],
                Step::Constant(c) => *c,
                Step::Formula { deps, eval } => {
                    args.clear();
                    for &(j, lag) in deps {
                        let arg = if lag == 0 {
                            if plan.is_stock[j] {
                                level[j]
                            } else {
                                values[j][p]
                            }
                        } else if p >= lag {
                            values[j][p - lag]
                        } else if plan.is_stock[j] {
                            plan.initial[j]
                        } else {
                            0.0
                        };
                        args.push(arg);
                    }
                    eval(&args)
                }
            };
            values[*i][p] = v;
        }
        // Flows are final for this period, so stock order does not matter.
        for s in &plan.stocks {
            let inflow: f64 = s.inflows.iter().map(|&j| values[j][p]).sum();
            let outflow: f64 = s.outflows.iter().map(|&j| values[j][p]).sum();
            level[s.index] += inflow - outflow;
        }
        for s in &plan.stocks {
            values[s.index][p] = level[s.index];
        }
    }

    let series = model
        .components
        .iter()
        .zip(values)
        .map(|(c, values)| {
            (
                c.name.clone(),
                Series {
                    kind: c.kind,
                    unit: c.unit.clone(),
                    values,
                },
            )
        })
        .collect();
    Ok(RunResult {
        provenance: Provenance {
            model_id: model.id.clone(),
            digest: model.digest(),
        },
        horizon,
        series,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn accumulate(inflow: f64, horizon: usize) -> Model {
        let mut m = Model::new("acc", horizon).unwrap();
        m.add(ModelComponent::stock("S", "MB", 0.0, &["In"], &[]))
            .unwrap()
            .add(ModelComponent::formula(
                "In",
                ComponentKind::Flow,
                "MB",
                "const",
                vec![],
                move |_| inflow,
            ))
            .unwrap();
        m
    }

    #[test]
    fn unit_accumulation() {
        let r = run(&accumulate(1.0, 5)).unwrap();
        assert_eq!(r.series("S").unwrap().values, vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(r.series("S").unwrap().points().next(), Some((1, 1.0)));
    }

    #[test]
    fn balanced_flows_conserve_stock() {
        let mut m = Model::new("bal", 6).unwrap();
        m.add(ModelComponent::stock("S", "MB", 42.0, &["In"], &["Out"]))
            .unwrap()
            .add(ModelComponent::input("In", ComponentKind::Flow, "MB"))
            .unwrap()
            .add(ModelComponent::formula(
                "Out",
                ComponentKind::Flow,
                "MB",
                "mirror",
                vec![Ref::current("In")],
                |a| a[0],
            ))
            .unwrap();
        m.set_input("In", vec![3.0, 1.0, 4.0, 1.0, 5.0, 9.0]);
        let r = run(&m).unwrap();
        assert!(r.series("S").unwrap().values.iter().all(|&v| v == 42.0));
    }

    #[test]
    fn stock_reference_reads_entering_level() {
        let mut m = accumulate(2.0, 3);
        m.add(ModelComponent::formula(
            "Seen",
            ComponentKind::Converter,
            "MB",
            "copy",
            vec![Ref::current("S")],
            |a| a[0],
        ))
        .unwrap();
        let r = run(&m).unwrap();
        assert_eq!(r.series("Seen").unwrap().values, vec![0.0, 2.0, 4.0]);
    }

    #[test]
    fn lagged_reference_defaults_to_zero_before_start() {
        let mut m = Model::new("lag", 4).unwrap();
        m.add(ModelComponent::input("X", ComponentKind::Converter, ""))
            .unwrap()
            .add(ModelComponent::formula(
                "Y",
                ComponentKind::Converter,
                "",
                "delay 2",
                vec![Ref::lagged("X", 2)],
                |a| a[0],
            ))
            .unwrap();
        m.set_input("X", vec![1.0, 2.0, 3.0, 4.0]);
        let r = run(&m).unwrap();
        assert_eq!(r.series("Y").unwrap().values, vec![0.0, 0.0, 1.0, 2.0]);
    }

    #[test]
    fn declaration_order_does_not_matter() {
        let mut m = Model::new("ord", 3).unwrap();
        m.add(ModelComponent::formula(
            "C",
            ComponentKind::Converter,
            "",
            "b+1",
            vec![Ref::current("B")],
            |a| a[0] + 1.0,
        ))
        .unwrap()
        .add(ModelComponent::formula(
            "B",
            ComponentKind::Converter,
            "",
            "a*2",
            vec![Ref::current("A")],
            |a| a[0] * 2.0,
        ))
        .unwrap()
        .add(ModelComponent::input("A", ComponentKind::Converter, ""))
        .unwrap();
        m.set_input("A", vec![1.0, 2.0, 3.0]);
        let r = run(&m).unwrap();
        assert_eq!(r.series("C").unwrap().values, vec![3.0, 5.0, 7.0]);
    }

    #[test]
    fn cycles_are_rejected() {
        let mut m = Model::new("cyc", 2).unwrap();
        m.add(ModelComponent::formula(
            "A",
            ComponentKind::Converter,
            "",
            "b",
            vec![Ref::current("B")],
            |a| a[0],
        ))
        .unwrap()
        .add(ModelComponent::formula(
            "B",
            ComponentKind::Converter,
            "",
            "a",
            vec![Ref::current("A")],
            |a| a[0],
        ))
        .unwrap();
        let err = run(&m).unwrap_err();
        assert!(
            matches!(err, Error::Model(ref m) if m.contains("cyclic")),
            "{err}"
        );
    }

    #[test]
    fn lagged_self_reference_is_not_a_cycle() {
        let mut m = Model::new("counter", 4).unwrap();
        m.add(ModelComponent::formula(
            "N",
            ComponentKind::Converter,
            "",
            "n+1",
            vec![Ref::lagged("N", 1)],
            |a| a[0] + 1.0,
        ))
        .unwrap();
        let r = run(&m).unwrap();
        assert_eq!(r.series("N").unwrap().values, vec![1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn unknown_references_are_rejected() {
        let mut m = Model::new("unk", 2).unwrap();
        m.add(ModelComponent::formula(
            "A",
            ComponentKind::Converter,
            "",
            "ghost",
            vec![Ref::current("Ghost")],
            |a| a[0],
        ))
        .unwrap();
        assert!(matches!(run(&m), Err(Error::Model(_))));

        let mut s = Model::new("unk2", 2).unwrap();
        s.add(ModelComponent::stock("S", "", 0.0, &["Nope"], &[]))
            .unwrap();
        assert!(matches!(run(&s), Err(Error::Model(_))));
    }

    #[test]
    fn stocks_only_take_flows() {
        let mut m = Model::new("wiring", 2).unwrap();
        m.add(ModelComponent::constant("K", "", 1.0))
            .unwrap()
            .add(ModelComponent::stock("S", "", 0.0, &["K"], &[]))
            .unwrap();
        assert!(matches!(run(&m), Err(Error::Model(_))));
    }

    #[test]
    fn duplicate_names_and_zero_horizon_are_rejected() {
        assert!(Model::new("empty", 0).is_err());
        let mut m = Model::new("dup", 1).unwrap();
        m.add(ModelComponent::constant("K", "", 1.0)).unwrap();
        assert!(m.add(ModelComponent::constant("K", "", 2.0)).is_err());
    }

    #[test]
    fn short_inputs_are_padded_with_zero() {
        let mut m = Model::new("pad", 4).unwrap();
        m.add(ModelComponent::input("X", ComponentKind::Flow, "MB"))
            .unwrap();
        m.set_input("X", vec![7.0, 8.0]);
        let r = run(&m).unwrap();
        assert_eq!(r.series("X").unwrap().values, vec![7.0, 8.0, 0.0, 0.0]);
        assert_eq!(r.horizon, 4);
    }

    #[test]
    fn missing_input_series_is_an_error() {
        let mut m = Model::new("noinput", 2).unwrap();
        m.add(ModelComponent::input("X", ComponentKind::Flow, "MB"))
            .unwrap();
        assert!(matches!(run(&m), Err(Error::Model(_))));
    }

    #[test]
    fn digest_tracks_inputs() {
        let mut a = Model::new("d", 2).unwrap();
        a.add(ModelComponent::input("X", ComponentKind::Flow, "MB"))
            .unwrap();
        a.set_input("X", vec![1.0, 2.0]);
        let mut b = a.clone();
        assert_eq!(a.digest(), b.digest());
        b.set_input("X", vec![1.0, 2.5]);
        assert_ne!(a.digest(), b.digest());
        assert_eq!(a.digest().len(), 64);
    }
}

//! Benchmark sweep over control cost, oscillation condition, goal pose and
//! method, plus best-setting selection and CSV output.

mod report;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::controllers::{prepare, Method, PreparedController};
use crate::error::{Error, Result};
use crate::geometry::Pose6;
use crate::lqr::{CostSpec, SystemModel};
use crate::metrics::{evaluate, AccuracyLimits, REQUIRED_ACCURACY};
use crate::mixture::JointGmm;
use crate::sim::{run_episode, Axis, EpisodeConfig, EpisodeLog, OscillationSpec, DEFAULT_FREQUENCY};

pub use report::{report, summarize, write_plots, ConditionSummary, Interval, Report};

pub const RESULT_HEADER: [&str; 11] = [
    "method",
    "rho",
    "axis",
    "amplitude_level",
    "goal_id",
    "seed",
    "accuracy",
    "translation_m",
    "rotation_rad",
    "grasp_time_s",
    "never_arrived",
];

pub const CENTRAL_GOAL: [f64; 6] = [0.22, 0.27, -0.26, 0.0, 0.0, 1.46];
pub const DEFAULT_START: [f64; 6] = [-0.30, 0.30, 0.00, 0.30, -0.20, 0.50];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AmplitudeLevel {
    None,
    Low,
    Medium,
    High,
}

impl AmplitudeLevel {
    pub const ALL: [AmplitudeLevel; 4] = [Self::None, Self::Low, Self::Medium, Self::High];
    pub const MOVING: [AmplitudeLevel; 3] = [Self::Low, Self::Medium, Self::High];

    fn index(&self) -> usize {
        *self as usize
    }

    /// Meters for position axes, radians for angle axes.
    pub fn amplitude(&self, axis: Axis) -> f64 {
        let table = if axis.is_position() {
            [0.0, 0.05, 0.10, 0.15]
        } else {
            [0.0, 0.15, 0.30, 0.45]
        };
        table[self.index()]
    }

    pub fn name(&self) -> &'static str {
        ["none", "low", "medium", "high"][self.index()]
    }
}

impl fmt::Display for AmplitudeLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AmplitudeLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|l| l.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown amplitude level {s:?}")))
    }
}

/// Oscillation grouping used for selection and reporting: static, or a level
/// over all position axes or all orientation axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Condition {
    Static,
    Orientation(AmplitudeLevel),
    Position(AmplitudeLevel),
}

impl Condition {
    /// Row order of the summary table.
    pub const TABLE_ORDER: [Condition; 7] = [
        Condition::Static,
        Condition::Orientation(AmplitudeLevel::Low),
        Condition::Position(AmplitudeLevel::Low),
        Condition::Orientation(AmplitudeLevel::Medium),
        Condition::Position(AmplitudeLevel::Medium),
        Condition::Orientation(AmplitudeLevel::High),
        Condition::Position(AmplitudeLevel::High),
    ];

    pub fn of(axis: Option<Axis>, level: AmplitudeLevel) -> Self {
        match axis {
            None => Condition::Static,
            Some(_) if level == AmplitudeLevel::None => Condition::Static,
            Some(a) if a.is_position() => Condition::Position(level),
            Some(_) => Condition::Orientation(level),
        }
    }

    pub fn of_row(row: &ResultRow) -> Result<Self> {
        let level: AmplitudeLevel = row.amplitude_level.parse()?;
        let axis = if row.axis == "none" {
            None
        } else {
            Some(row.axis.parse()?)
        };
        Ok(Self::of(axis, level))
    }

    pub fn label(&self) -> String {
        match self {
            Condition::Static => "None".to_string(),
            Condition::Orientation(l) => format!("{}, Orientation", capitalized(l.name())),
            Condition::Position(l) => format!("{}, Position", capitalized(l.name())),
        }
    }
}

fn capitalized(s: &str) -> String {
    let mut c = s.chars();
    c.next()
        .map_or_else(String::new, |f| f.to_uppercase().collect::<String>() + c.as_str())
}

/// Condition under which each method's control cost is chosen.
pub fn selection_condition(method: Method) -> Condition {
    match method {
        Method::InfLqr => Condition::Position(AmplitudeLevel::High),
        Method::SingleLqr => Condition::Orientation(AmplitudeLevel::Medium),
        Method::DualLqr => Condition::Orientation(AmplitudeLevel::High),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepPlan {
    pub methods: Vec<Method>,
    pub rhos: Vec<f64>,
    pub axes: Vec<Axis>,
    /// Moving levels run on every axis; a static run is added when `include_static` is set.
    pub levels: Vec<AmplitudeLevel>,
    pub include_static: bool,
    pub goals: Vec<Pose6>,
    pub start_pose: Pose6,
    pub seeds: Vec<u64>,
    pub dt: f64,
    pub horizon: usize,
    pub frequency: f64,
    pub phase: f64,
    pub decay: f64,
    pub latency_ticks: usize,
    pub velocity_clamp: Option<[f64; 6]>,
    pub limits: AccuracyLimits,
}

impl Default for SweepPlan {
    fn default() -> Self {
        default_plan()
    }
}

/// `rho` from -3.0 to 3.0 in steps of 0.3, rounded to one decimal.
pub fn rho_grid() -> Vec<f64> {
    (0..=20).map(|i| ((-30 + 3 * i) as f64) / 10.0).collect()
}

/// Central goal plus ten single-dimension variants.
pub fn default_goals() -> Vec<Pose6> {
    let mut goals = vec![Pose6::from_array(CENTRAL_GOAL)];
    for (dim, delta) in [(0, 0.1), (1, 0.2), (2, 0.05), (3, 0.2), (5, 0.2)] {
        for sign in [1.0, -1.0] {
            let mut g = CENTRAL_GOAL;
            g[dim] += sign * delta;
            goals.push(Pose6::from_array(g));
        }
    }
    goals
}

pub fn default_plan() -> SweepPlan {
    SweepPlan {
        methods: Method::ALL.to_vec(),
        rhos: rho_grid(),
        axes: Axis::ALL.to_vec(),
        levels: AmplitudeLevel::MOVING.to_vec(),
        include_static: true,
        goals: default_goals(),
        start_pose: Pose6::from_array(DEFAULT_START),
        seeds: vec![0],
        dt: SystemModel::DEFAULT_DT,
        horizon: crate::demos::DEFAULT_HORIZON,
        frequency: DEFAULT_FREQUENCY,
        phase: 0.0,
        decay: 0.0,
        latency_ticks: 0,
        velocity_clamp: None,
        limits: AccuracyLimits::default(),
    }
}

/// One episode of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeKey {
    pub method: Method,
    pub rho: f64,
    pub axis: Option<Axis>,
    pub level: AmplitudeLevel,
    pub goal_id: usize,
    pub seed: u64,
}

impl SweepPlan {
    pub fn validate(&self) -> Result<()> {
        let empty = |what: &str| Err(Error::invalid(format!("sweep plan has no {what}")));
        if self.methods.is_empty() {
            return empty("methods");
        }
        if self.rhos.is_empty() {
            return empty("rho values");
        }
        if self.goals.is_empty() {
            return empty("goals");
        }
        if self.seeds.is_empty() {
            return empty("seeds");
        }
        if !self.include_static && (self.axes.is_empty() || self.levels.is_empty()) {
            return empty("oscillation conditions");
        }
        if let Some(i) = self.goals.iter().position(|g| !g.is_finite()) {
            return Err(Error::invalid(format!("goal {i} is not finite")));
        }
        if self.rhos.iter().any(|r| !r.is_finite()) {
            return Err(Error::invalid("rho values must be finite"));
        }
        if self.levels.contains(&AmplitudeLevel::None) {
            return Err(Error::invalid(
                "use include_static for the static condition, not level \"none\"",
            ));
        }
        SystemModel::new(self.dt)?;
        if self.horizon < 2 {
            return Err(Error::invalid("horizon must be at least 2"));
        }
        self.limits.validate()
    }

    /// Oscillation conditions in row order: static first, then axis by level.
    pub fn conditions(&self) -> Vec<(Option<Axis>, AmplitudeLevel)> {
        let mut out = Vec::new();
        if self.include_static {
            out.push((None, AmplitudeLevel::None));
        }
        for &axis in &self.axes {
            for &level in &self.levels {
                out.push((Some(axis), level));
            }
        }
        out
    }

    pub fn episodes(&self) -> Vec<EpisodeKey> {
        let mut out = Vec::new();
        for &method in &self.methods {
            for &rho in &self.rhos {
                for (axis, level) in self.conditions() {
                    for goal_id in 0..self.goals.len() {
                        for &seed in &self.seeds {
                            out.push(EpisodeKey {
                                method,
                                rho,
                                axis,
                                level,
                                goal_id,
                                seed,
                            });
                        }
                    }
                }
            }
        }
        out
    }

    pub fn episode_config(&self, key: &EpisodeKey) -> EpisodeConfig {
        let oscillation = match key.axis {
            Some(axis) => OscillationSpec {
                axis,
                amplitude: key.level.amplitude(axis),
                frequency: self.frequency,
                phase: self.phase,
                decay: self.decay,
            },
            None => OscillationSpec::none(),
        };
        EpisodeConfig {
            start_pose: self.start_pose,
            goal_pose: self.goals[key.goal_id],
            oscillation,
            dt: self.dt,
            horizon: self.horizon,
            velocity_clamp: self.velocity_clamp,
            latency_ticks: self.latency_ticks,
            seed: key.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub method: Method,
    pub rho: f64,
    pub axis: String,
    pub amplitude_level: String,
    pub goal_id: usize,
    pub seed: u64,
    pub accuracy: f64,
    pub translation_m: f64,
    pub rotation_rad: f64,
    /// Grasp time, or the episode duration when no grasp occurred.
    pub grasp_time_s: f64,
    pub never_arrived: bool,
}

impl ResultRow {
    fn sort_key(&self) -> (Method, usize, usize, usize, u64) {
        let axis = Axis::ALL
            .iter()
            .position(|a| a.name() == self.axis)
            .map_or(0, |i| i + 1);
        let level = AmplitudeLevel::ALL
            .iter()
            .position(|l| l.name() == self.amplitude_level)
            .unwrap_or(0);
        (self.method, axis, level, self.goal_id, self.seed)
    }
}

fn row_order(a: &ResultRow, b: &ResultRow) -> Ordering {
    let (am, ax, al, ag, as_) = a.sort_key();
    let (bm, bx, bl, bg, bs) = b.sort_key();
    am.cmp(&bm)
        .then(a.rho.total_cmp(&b.rho))
        .then(ax.cmp(&bx))
        .then(al.cmp(&bl))
        .then(ag.cmp(&bg))
        .then(as_.cmp(&bs))
}

/// Runs one episode and reduces it to a result row.
pub fn run_key(plan: &SweepPlan, pc: &PreparedController, key: &EpisodeKey) -> Result<(ResultRow, EpisodeLog)> {
    let log = run_episode(pc, &plan.episode_config(key))?;
    let m = evaluate(&log, &plan.limits)?;
    let row = ResultRow {
        method: key.method,
        rho: key.rho,
        axis: key.axis.map_or("none", |a| a.name()).to_string(),
        amplitude_level: key.level.name().to_string(),
        goal_id: key.goal_id,
        seed: key.seed,
        accuracy: m.accuracy,
        translation_m: m.translation,
        rotation_rad: m.rotation,
        grasp_time_s: m.grasp_time.unwrap_or(m.duration),
        never_arrived: m.never_arrived,
    };
    Ok((row, log))
}

/// Prepares one controller per `(method, rho)` of the plan.
pub fn prepare_all(plan: &SweepPlan, joint: &JointGmm) -> Result<Vec<((Method, u64), PreparedController)>> {
    let model = SystemModel::new(plan.dt)?;
    let mut out = Vec::new();
    for &method in &plan.methods {
        for &rho in &plan.rhos {
            let pc = prepare(method, joint, CostSpec::new(rho)?, model, plan.horizon)?;
            out.push(((method, rho.to_bits()), pc));
        }
    }
    Ok(out)
}

/// Runs every episode of the plan on up to `threads` workers (0 = all cores).
/// Rows come back in a fixed order that does not depend on scheduling.
pub fn sweep(plan: &SweepPlan, joint: &JointGmm, threads: usize) -> Result<Vec<ResultRow>> {
    plan.validate()?;
    let controllers: BTreeMap<(Method, u64), PreparedController> = prepare_all(plan, joint)?.into_iter().collect();
    let keys = plan.episodes();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    let mut rows = pool.install(|| {
        keys.par_iter()
            .map(|k| {
                let pc = &controllers[&(k.method, k.rho.to_bits())];
                run_key(plan, pc, k).map(|(row, _)| row)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    rows.sort_by(row_order);
    log::info!("sweep finished: {} episodes", rows.len());
    Ok(rows)
}

pub fn write_rows<W: Write>(rows: &[ResultRow], w: W) -> Result<()> {
    let mut wr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    wr.write_record(RESULT_HEADER).map_err(|e| Error::Io(e.into()))?;
    for r in rows {
        wr.serialize(r).map_err(|e| Error::Io(e.into()))?;
    }
    wr.flush()?;
    Ok(())
}

pub fn save_rows(rows: &[ResultRow], path: &Path) -> Result<()> {
    write_rows(rows, std::fs::File::create(path)?)
}

pub fn read_rows<R: Read>(r: R, origin: &Path) -> Result<Vec<ResultRow>> {
    let mut rd = csv::Reader::from_reader(r);
    let header = rd
        .headers()
        .map_err(|e| Error::parse(origin, Some(1), e.to_string()))?
        .clone();
    if header.iter().ne(RESULT_HEADER) {
        return Err(Error::parse(
            origin,
            Some(1),
            format!("header must be {}", RESULT_HEADER.join(",")),
        ));
    }
    rd.deserialize()
        .map(|r| {
            r.map_err(|e| {
                let line = e.position().map(|p| p.line());
                Error::parse(origin, line, e.to_string())
            })
        })
        .collect()
}

pub fn load_rows(path: &Path) -> Result<Vec<ResultRow>> {
    read_rows(std::fs::File::open(path)?, path)
}

/// Mean accuracy per `rho` of one method's rows under one condition.
pub fn accuracy_by_rho(rows: &[ResultRow], method: Method, condition: Condition) -> Result<Vec<(f64, f64)>> {
    let mut acc: BTreeMap<u64, (f64, f64, usize)> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.method == method) {
        if Condition::of_row(r)? != condition {
            continue;
        }
        let e = acc.entry(ordered_bits(r.rho)).or_insert((r.rho, 0.0, 0));
        e.1 += r.accuracy;
        e.2 += 1;
    }
    Ok(acc.into_values().map(|(rho, sum, n)| (rho, sum / n as f64)).collect())
}

/// Bit pattern whose unsigned order matches numeric order.
fn ordered_bits(x: f64) -> u64 {
    let b = x.to_bits();
    if b >> 63 == 1 {
        !b
    } else {
        b | (1 << 63)
    }
}

/// Largest `rho` whose mean accuracy under `condition` reaches `threshold`.
pub fn select_rho(rows: &[ResultRow], method: Method, condition: Condition, threshold: f64) -> Result<Option<f64>> {
    Ok(accuracy_by_rho(rows, method, condition)?
        .into_iter()
        .filter(|&(_, a)| a >= threshold)
        .map(|(rho, _)| rho)
        .reduce(f64::max))
}

/// Per-method best control cost; each method is judged under
/// `condition(method)`.
pub fn select_best(
    rows: &[ResultRow],
    threshold: f64,
    condition: impl Fn(Method) -> Condition,
) -> Result<BTreeMap<Method, Option<f64>>> {
    if rows.is_empty() {
        return Err(Error::invalid("no result rows to select from"));
    }
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::invalid(format!("threshold must lie in (0, 1], got {threshold}")));
    }
    let mut methods: Vec<Method> = rows.iter().map(|r| r.method).collect();
    methods.sort();
    methods.dedup();
    methods
        .into_iter()
        .map(|m| Ok((m, select_rho(rows, m, condition(m), threshold)?)))
        .collect()
}

/// [`select_best`] with the default threshold and per-method conditions.
pub fn select_default(rows: &[ResultRow]) -> Result<BTreeMap<Method, Option<f64>>> {
    select_best(rows, REQUIRED_ACCURACY, selection_condition)
}

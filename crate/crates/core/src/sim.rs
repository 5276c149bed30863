//! Exact event-driven simulation of rank-based preemptive scheduling.
//!
//! Only the jobs in service age, so waiting jobs sit in an ordered map
//! keyed by their (static) rank and arrival id. The next event is found
//! exactly from the piecewise-linear rank of the job(s) in service: an
//! arrival, a completion, a rank breakpoint, or the first age at which the
//! served rank reaches the best waiting rank.
//!
//! Ties are broken first-come first-served. When every tied job has a
//! rising rank, serving any one of them would immediately hand priority
//! to the others, so tied rising jobs share the processor at rates that
//! keep their ranks equal (processor sharing for FB).

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BinaryHeap};
use alloc::format;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::ops::Bound::{Excluded, Included, Unbounded};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dist::Mg1;
use crate::error::{Error, Result};
use crate::rank::{policy_rank, PiecewiseLinearFn, PolicySpec};
use crate::rank_tol;
use crate::stats::BatchMeans;

/// Minimum measured completions for a meaningful batch-means interval.
pub const MIN_JOBS: u64 = 10_000;
/// Minimum number of batches.
pub const MIN_BATCHES: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub mg1: Mg1,
    pub policy: PolicySpec,
    /// Completions measured after warmup.
    pub jobs: u64,
    /// Extra completions discarded before measuring, as a fraction of `jobs`.
    pub warmup: f64,
    pub seed: u64,
    pub batches: usize,
}

impl SimConfig {
    pub fn new(mg1: Mg1, policy: PolicySpec) -> Self {
        Self {
            mg1,
            policy,
            jobs: 1_000_000,
            warmup: 0.1,
            seed: 0,
            batches: 20,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.jobs < MIN_JOBS {
            return Err(Error::InvalidParameter(format!(
                "need at least {MIN_JOBS} measured jobs, got {}",
                self.jobs
            )));
        }
        if !(0.0..1.0).contains(&self.warmup) {
            return Err(Error::InvalidParameter(format!(
                "warmup fraction {} must lie in [0, 1)",
                self.warmup
            )));
        }
        if self.batches < MIN_BATCHES {
            return Err(Error::InvalidParameter(format!(
                "need at least {MIN_BATCHES} batches, got {}",
                self.batches
            )));
        }
        let rho = self.mg1.rho();
        if rho >= 1.0 {
            return Err(Error::Unstable { rho });
        }
        Ok(())
    }

    fn warmup_jobs(&self) -> u64 {
        libm::round(self.warmup * self.jobs as f64) as u64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub policy: &'static str,
    pub mean_response: f64,
    /// 95% batch-means half-width.
    pub ci_half_width: f64,
    pub completions: u64,
    pub seed: u64,
    /// Total time the server was busy.
    pub busy_time: f64,
    /// Work completed plus service given to jobs still in the system.
    pub work_done: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceKind {
    Arrival,
    Serve,
    Complete,
}

impl TraceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TraceKind::Arrival => "arrival",
            TraceKind::Serve => "serve",
            TraceKind::Complete => "complete",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEvent {
    pub time: f64,
    pub kind: TraceKind,
    pub job_id: u64,
    pub age: f64,
    pub rank: f64,
}

/// Receives simulator events; `()` discards them.
pub trait Tracer {
    const ENABLED: bool = true;
    fn record(&mut self, ev: TraceEvent);
}

impl Tracer for () {
    const ENABLED: bool = false;
    fn record(&mut self, _: TraceEvent) {}
}

impl<F: FnMut(TraceEvent)> Tracer for F {
    fn record(&mut self, ev: TraceEvent) {
        self(ev)
    }
}

/// Answers "first age at or after `a` where `f` reaches `θ`" in O(log n)
/// with a sparse table of per-piece suprema.
#[derive(Debug, Clone)]
struct ReachIndex {
    levels: Vec<Vec<f64>>,
}

impl ReachIndex {
    fn new(f: &PiecewiseLinearFn) -> Self {
        let n = f.len();
        let base: Vec<f64> = (0..n).map(|k| f.piece_sup(k)).collect();
        let mut levels = alloc::vec![base];
        let mut width = 1;
        while 2 * width <= n {
            let prev = &levels[levels.len() - 1];
            let next: Vec<f64> = (0..=n - 2 * width)
                .map(|i| prev[i].max(prev[i + width]))
                .collect();
            levels.push(next);
            width *= 2;
        }
        Self { levels }
    }

    /// First piece index `>= from` whose supremum is at least `theta`.
    fn first_piece(&self, from: usize, theta: f64) -> Option<usize> {
        let n = self.levels[0].len();
        let mut i = from;
        for j in (0..self.levels.len()).rev() {
            let w = 1usize << j;
            if i + w <= n && self.levels[j][i] < theta {
                i += w;
            }
        }
        (i < n).then_some(i)
    }

    fn first_reach(&self, f: &PiecewiseLinearFn, a: f64, theta: f64) -> Option<f64> {
        let k = f.piece_index(a);
        if f.piece_value(k, a) >= theta {
            return Some(a);
        }
        let m = f.piece_slope(k);
        if m > 0.0 {
            let s = f.starts()[k];
            let t = s + (theta - f.piece_value(k, s)) / m;
            if t < f.piece_end(k) {
                return Some(t.max(a));
            }
        }
        let j = self.first_piece(k + 1, theta)?;
        let s = f.starts()[j];
        let v = f.piece_value(j, s);
        if v >= theta {
            return Some(s);
        }
        let t = s + (theta - v) / f.piece_slope(j);
        Some(t.min(f.piece_end(j)).max(s))
    }
}

/// How a job's rank depends on its age.
enum Ranker {
    Shared {
        f: PiecewiseLinearFn,
        reach: ReachIndex,
    },
    /// SRPT: rank is remaining size.
    Remaining,
}

impl Ranker {
    #[inline]
    fn rank(&self, job: &Job, age: f64) -> f64 {
        match self {
            Ranker::Shared { f, .. } => f.value(age),
            Ranker::Remaining => job.size - age,
        }
    }

    #[inline]
    fn slope(&self, age: f64) -> f64 {
        match self {
            Ranker::Shared { f, .. } => f.slope_at(age),
            Ranker::Remaining => -1.0,
        }
    }

    #[inline]
    fn next_breakpoint(&self, age: f64) -> Option<f64> {
        match self {
            Ranker::Shared { f, .. } => f.next_breakpoint(age),
            Ranker::Remaining => None,
        }
    }

    #[inline]
    fn first_reach(&self, age: f64, theta: f64) -> Option<f64> {
        match self {
            Ranker::Shared { f, reach } => reach.first_reach(f, age, theta),
            Ranker::Remaining => None,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Job {
    id: u64,
    size: f64,
    age: f64,
    arrival: f64,
}

/// A job sharing the processor inside a group. Its age is tracked relative
/// to the group's common rank: `age = age_ref + (rank - rank_ref) / slope`.
#[derive(Debug, Clone, Copy)]
struct Member {
    job: Job,
    age_ref: f64,
    rank_ref: f64,
    slope: f64,
    /// Group rank at which this member completes or hits a breakpoint.
    event_rank: f64,
    target: f64,
}

impl Member {
    fn new(job: Job, rank: f64, slope: f64, ranker: &Ranker) -> Self {
        let target = match ranker.next_breakpoint(job.age) {
            Some(bp) if bp < job.size => bp,
            _ => job.size,
        };
        Self {
            job,
            age_ref: job.age,
            rank_ref: rank,
            slope,
            event_rank: rank + slope * (target - job.age),
            target,
        }
    }

    #[inline]
    fn age_at(&self, rank: f64) -> f64 {
        (self.age_ref + (rank - self.rank_ref) / self.slope).clamp(self.age_ref, self.target)
    }
}

impl PartialEq for Member {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Member {}
impl PartialOrd for Member {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Member {
    // Min-heap on event rank.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .event_rank
            .total_cmp(&self.event_rank)
            .then(other.job.id.cmp(&self.job.id))
    }
}

/// Jobs tied at a common rising rank, sharing the processor.
#[derive(Debug, Clone)]
struct Group {
    rank: f64,
    inv_slope_sum: f64,
    members: BinaryHeap<Member>,
}

impl Group {
    fn len(&self) -> usize {
        self.members.len()
    }

    fn add(&mut self, job: Job, slope: f64, ranker: &Ranker) {
        self.inv_slope_sum += 1.0 / slope;
        self.members
            .push(Member::new(job, self.rank, slope, ranker));
    }

    fn advance(&mut self, dt: f64) {
        self.rank += dt / self.inv_slope_sum;
    }

    fn next_event_dt(&self) -> f64 {
        let m = self.members.peek().expect("groups are never empty");
        ((m.event_rank - self.rank) * self.inv_slope_sum).max(0.0)
    }

    fn drain_jobs(self) -> impl Iterator<Item = Job> {
        let rank = self.rank;
        self.members.into_iter().map(move |m| Job {
            age: m.age_at(rank),
            ..m.job
        })
    }
}

enum Item {
    Single(Job),
    Group(Box<Group>),
}

/// Waiting-set key: rank first, then arrival id.
#[derive(Debug, Clone, Copy)]
struct Key {
    rank: f64,
    id: u64,
}

impl PartialEq for Key {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Key {}
impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank
            .total_cmp(&other.rank)
            .then(self.id.cmp(&other.id))
    }
}

enum Served {
    Idle,
    Single(Job),
    Group(Box<Group>),
}

enum Internal {
    None,
    /// Single job reaches this age (completion if it equals the size).
    SingleAt(f64),
    GroupMember,
    GroupCross,
}

struct Engine<'a, T: Tracer> {
    ranker: &'a Ranker,
    waiting: BTreeMap<Key, Item>,
    served: Served,
    now: f64,
    busy: f64,
    completed_work: f64,
    tracer: T,
    /// Reused buffer for tied keys.
    scratch: Vec<Key>,
}

impl<'a, T: Tracer> Engine<'a, T> {
    fn push_job(&mut self, job: Job) {
        let rank = self.ranker.rank(&job, job.age);
        self.waiting
            .insert(Key { rank, id: job.id }, Item::Single(job));
    }

    fn push_group(&mut self, g: Box<Group>) {
        if g.len() == 1 {
            let job = g.drain_jobs().next().unwrap();
            self.push_job(job);
        } else {
            let id = g.members.iter().map(|m| m.job.id).min().unwrap_or(0);
            self.waiting
                .insert(Key { rank: g.rank, id }, Item::Group(g));
        }
    }

    fn dissolve(&mut self) {
        match core::mem::replace(&mut self.served, Served::Idle) {
            Served::Idle => {}
            Served::Single(job) => self.push_job(job),
            Served::Group(g) => self.push_group(g),
        }
    }

    fn trace_serve(&mut self, job: &Job) {
        if T::ENABLED {
            let rank = self.ranker.rank(job, job.age);
            self.tracer.record(TraceEvent {
                time: self.now,
                kind: TraceKind::Serve,
                job_id: job.id,
                age: job.age,
                rank,
            });
        }
    }

    fn serve_item(&mut self, item: Item) {
        match item {
            Item::Single(job) => {
                self.trace_serve(&job);
                self.served = Served::Single(job);
            }
            Item::Group(g) => {
                if T::ENABLED {
                    let jobs: Vec<Job> = g.clone().drain_jobs().collect();
                    for j in &jobs {
                        self.trace_serve(j);
                    }
                }
                self.served = Served::Group(g);
            }
        }
    }

    fn is_flat_single(&self, item: &Item) -> bool {
        matches!(item, Item::Single(j) if self.ranker.slope(j.age) <= 0.0)
    }

    /// Picks what to serve from the waiting set.
    ///
    /// Entries whose ranks chain together within the tie tolerance form a
    /// tie class. The earliest job in the class whose rank is not rising
    /// wins; if every member is rising they are merged into one group.
    fn select(&mut self) {
        let Some((&k0, _)) = self.waiting.first_key_value() else {
            self.served = Served::Idle;
            return;
        };
        let tied = self
            .waiting
            .range((Excluded(k0), Unbounded))
            .next()
            .is_some_and(|(k, _)| k.rank <= k0.rank + rank_tol(k0.rank));
        if !tied {
            let item = self.waiting.remove(&k0).unwrap();
            self.serve_item(item);
            return;
        }

        // Walk the class level by level (a level is one exact rank value).
        // Within a level keys are in id order, so the first non-rising
        // single settles that level and the rest can be skipped.
        let mut rising = core::mem::take(&mut self.scratch);
        rising.clear();
        let mut winner: Option<Key> = None;
        let mut max_rank = k0.rank;
        let mut cursor = Included(k0);
        'levels: loop {
            let mut skip_to: Option<f64> = None;
            for (k, item) in self.waiting.range((cursor, Unbounded)) {
                if k.rank > max_rank + rank_tol(max_rank) {
                    break 'levels;
                }
                max_rank = max_rank.max(k.rank);
                if self.is_flat_single(item) {
                    if winner.is_none_or(|w| k.id < w.id) {
                        winner = Some(*k);
                    }
                    skip_to = Some(k.rank);
                    break;
                }
                rising.push(*k);
            }
            match skip_to {
                Some(r) => {
                    cursor = Excluded(Key {
                        rank: r,
                        id: u64::MAX,
                    })
                }
                None => break,
            }
        }

        if let Some(w) = winner {
            self.scratch = rising;
            let item = self.waiting.remove(&w).unwrap();
            self.serve_item(item);
            return;
        }

        // Everyone is rising: merge into the largest group.
        let mut items: Vec<(Key, Item)> = rising
            .drain(..)
            .map(|k| (k, self.waiting.remove(&k).unwrap()))
            .collect();
        self.scratch = rising;
        let base_idx = items
            .iter()
            .enumerate()
            .max_by_key(|(_, (_, item))| match item {
                Item::Group(g) => g.len(),
                Item::Single(_) => 0,
            })
            .map(|(i, _)| i)
            .unwrap();
        let (base_key, base_item) = items.swap_remove(base_idx);
        let mut base = match base_item {
            Item::Group(g) => g,
            Item::Single(job) => {
                let mut g = Box::new(Group {
                    rank: base_key.rank,
                    inv_slope_sum: 0.0,
                    members: BinaryHeap::new(),
                });
                g.add(job, self.ranker.slope(job.age), self.ranker);
                g
            }
        };
        for (_, item) in items {
            match item {
                Item::Single(job) => base.add(job, self.ranker.slope(job.age), self.ranker),
                Item::Group(g) => {
                    for job in g.drain_jobs() {
                        base.add(job, self.ranker.slope(job.age), self.ranker);
                    }
                }
            }
        }
        if T::ENABLED {
            let jobs: Vec<Job> = base.clone().drain_jobs().collect();
            for j in &jobs {
                self.trace_serve(j);
            }
        }
        self.served = Served::Group(base);
    }

    fn waiting_rank(&self) -> Option<f64> {
        self.waiting.first_key_value().map(|(k, _)| k.rank)
    }

    /// Time until the next event inside the served set, and its kind.
    fn next_internal(&self) -> (f64, Internal) {
        match &self.served {
            Served::Idle => (f64::INFINITY, Internal::None),
            Served::Single(job) => {
                let target = match self.waiting_rank() {
                    None => job.size,
                    Some(rw) => {
                        let tol = rank_tol(rw);
                        let r = self.ranker.rank(job, job.age);
                        let hit = if r < rw - tol {
                            self.ranker.first_reach(job.age, rw - 0.5 * tol)
                        } else {
                            self.ranker.next_breakpoint(job.age)
                        };
                        match hit {
                            Some(a) if a < job.size => a,
                            _ => job.size,
                        }
                    }
                };
                ((target - job.age).max(0.0), Internal::SingleAt(target))
            }
            Served::Group(g) => {
                let dm = g.next_event_dt();
                let dc = match self.waiting_rank() {
                    None => f64::INFINITY,
                    Some(rw) => ((rw - 0.5 * rank_tol(rw) - g.rank) * g.inv_slope_sum).max(0.0),
                };
                if dm <= dc {
                    (dm, Internal::GroupMember)
                } else {
                    (dc, Internal::GroupCross)
                }
            }
        }
    }

    fn advance(&mut self, dt: f64) {
        match &mut self.served {
            Served::Idle => return,
            Served::Single(job) => job.age += dt,
            Served::Group(g) => g.advance(dt),
        }
        self.busy += dt;
        self.now += dt;
    }

    fn complete(&mut self, job: Job, sink: &mut impl FnMut(f64)) {
        self.completed_work += job.size;
        if T::ENABLED {
            self.tracer.record(TraceEvent {
                time: self.now,
                kind: TraceKind::Complete,
                job_id: job.id,
                age: job.size,
                rank: f64::NAN,
            });
        }
        sink(self.now - job.arrival);
    }

    /// Runs the internal event chosen by `next_internal`.
    fn fire(&mut self, kind: Internal, sink: &mut impl FnMut(f64)) {
        match kind {
            Internal::None => {}
            Internal::SingleAt(target) => {
                let Served::Single(mut job) = core::mem::replace(&mut self.served, Served::Idle)
                else {
                    unreachable!()
                };
                job.age = target;
                if target >= job.size {
                    self.complete(job, sink);
                } else {
                    let r = self.ranker.rank(&job, target);
                    if self.waiting_rank().is_none_or(|w| w > r + rank_tol(r)) {
                        // Still strictly first: keep serving.
                        self.served = Served::Single(job);
                        return;
                    }
                    self.push_job(job);
                }
                self.select();
            }
            Internal::GroupMember => {
                let Served::Group(mut g) = core::mem::replace(&mut self.served, Served::Idle)
                else {
                    unreachable!()
                };
                let m = g.members.pop().unwrap();
                g.inv_slope_sum -= 1.0 / m.slope;
                let job = Job {
                    age: m.target,
                    ..m.job
                };
                if m.target >= job.size {
                    self.complete(job, sink);
                } else {
                    self.push_job(job);
                }
                if !g.members.is_empty() {
                    // Avoid drift in the slope sum once the group shrinks.
                    g.inv_slope_sum = g.members.iter().map(|m| 1.0 / m.slope).sum();
                    self.push_group(g);
                }
                self.select();
            }
            Internal::GroupCross => {
                self.dissolve();
                self.select();
            }
        }
    }

    fn in_flight_work(&self) -> f64 {
        let mut w = 0.0;
        let mut add_group = |g: &Group| {
            for m in g.members.iter() {
                w += m.age_at(g.rank);
            }
        };
        match &self.served {
            Served::Idle => {}
            Served::Single(j) => w += j.age,
            Served::Group(g) => add_group(g),
        }
        for item in self.waiting.values() {
            match item {
                Item::Single(j) => w += j.age,
                Item::Group(g) => {
                    for m in g.members.iter() {
                        w += m.age_at(g.rank);
                    }
                }
            }
        }
        w
    }
}

fn build_ranker(config: &SimConfig) -> Result<Ranker> {
    match &config.policy {
        PolicySpec::Srpt => Ok(Ranker::Remaining),
        PolicySpec::Ps => Err(Error::Unsupported(
            "processor sharing is analytic only; use the closed form".into(),
        )),
        p => {
            let f = policy_rank(p, config.mg1.dist())?;
            let reach = ReachIndex::new(&f);
            Ok(Ranker::Shared { f, reach })
        }
    }
}

fn exp_sample(rng: &mut ChaCha8Rng, rate: f64) -> f64 {
    let u: f64 = rng.gen();
    -libm::log1p(-u) / rate
}

/// Simulates the configured queue and policy.
pub fn simulate(config: &SimConfig) -> Result<SimResult> {
    simulate_traced(config, ())
}

/// Like [`simulate`], reporting every arrival, service decision and
/// completion to `tracer`.
pub fn simulate_traced<T: Tracer>(config: &SimConfig, tracer: T) -> Result<SimResult> {
    config.validate()?;
    let ranker = build_ranker(config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let dist = config.mg1.dist();
    let lambda = config.mg1.lambda();
    let warm = config.warmup_jobs();
    let mut stats = BatchMeans::new(config.jobs, config.batches);
    let mut seen: u64 = 0;

    if lambda == 0.0 {
        // Every job finds the system empty.
        let mut tracer = tracer;
        let mut work = 0.0;
        while stats.count() < config.jobs {
            let size = dist.sample(&mut rng);
            if T::ENABLED {
                tracer.record(TraceEvent {
                    time: 0.0,
                    kind: TraceKind::Complete,
                    job_id: seen,
                    age: size,
                    rank: f64::NAN,
                });
            }
            if seen >= warm {
                stats.push(size);
            }
            seen += 1;
            work += size;
        }
        let (mean, half) = stats.estimate();
        return Ok(SimResult {
            policy: config.policy.name(),
            mean_response: mean,
            ci_half_width: half,
            completions: stats.count(),
            seed: config.seed,
            busy_time: work,
            work_done: work,
        });
    }

    let mut engine = Engine {
        ranker: &ranker,
        waiting: BTreeMap::new(),
        served: Served::Idle,
        now: 0.0,
        busy: 0.0,
        completed_work: 0.0,
        tracer,
        scratch: Vec::new(),
    };
    let mut next_arrival = exp_sample(&mut rng, lambda);
    let mut next_id: u64 = 0;

    loop {
        let (dt, kind) = engine.next_internal();
        let until_arrival = next_arrival - engine.now;
        if until_arrival < dt {
            engine.advance(until_arrival.max(0.0));
            engine.now = next_arrival;
            let job = Job {
                id: next_id,
                size: dist.sample(&mut rng),
                age: 0.0,
                arrival: next_arrival,
            };
            next_id += 1;
            next_arrival += exp_sample(&mut rng, lambda);
            if T::ENABLED {
                let rank = ranker.rank(&job, 0.0);
                engine.tracer.record(TraceEvent {
                    time: engine.now,
                    kind: TraceKind::Arrival,
                    job_id: job.id,
                    age: 0.0,
                    rank,
                });
            }
            engine.dissolve();
            engine.push_job(job);
            engine.select();
        } else {
            engine.advance(dt);
            engine.fire(kind, &mut |t: f64| {
                if seen >= warm {
                    stats.push(t);
                }
                seen += 1;
            });
            if seen >= warm + config.jobs {
                break;
            }
        }
    }

    let work_done = engine.completed_work + engine.in_flight_work();
    let busy = engine.busy;
    assert!(
        libm::fabs(busy - work_done) <= 1e-7 * busy.max(1.0),
        "work conservation violated: busy {busy}, work {work_done}"
    );
    let (mean, half) = stats.estimate();
    Ok(SimResult {
        policy: config.policy.name(),
        mean_response: mean,
        ci_half_width: half,
        completions: stats.count(),
        seed: config.seed,
        busy_time: busy,
        work_done,
    })
}

/// Simulates several policies on the same queue. With common random
/// numbers every policy sees the same arrival times and job sizes;
/// otherwise policy `i` uses seed `base.seed + i`.
pub fn compare_policies(
    mg1: &Mg1,
    policies: &[PolicySpec],
    base: &SimConfig,
    common_random_numbers: bool,
) -> Result<Vec<SimResult>> {
    policies
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let cfg = SimConfig {
                mg1: mg1.clone(),
                policy: p.clone(),
                seed: if common_random_numbers {
                    base.seed
                } else {
                    base.seed.wrapping_add(i as u64)
                },
                ..base.clone()
            };
            simulate(&cfg)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::DiscreteDist;

    fn cfg(mg1: Mg1, policy: PolicySpec, jobs: u64) -> SimConfig {
        SimConfig {
            jobs,
            seed: 42,
            ..SimConfig::new(mg1, policy)
        }
    }

    #[test]
    fn reach_index_matches_scan() {
        let f = PiecewiseLinearFn::new(
            alloc::vec![
                (0.0, 1.0, -1.0),
                (0.5, 3.0, 0.0),
                (1.0, 0.0, 2.0),
                (2.0, 1.0, -0.5),
                (3.0, 5.0, 0.0),
            ],
            4.0,
        )
        .unwrap();
        let idx = ReachIndex::new(&f);
        assert_eq!(idx.first_reach(&f, 0.0, 2.0), Some(0.5));
        assert_eq!(idx.first_reach(&f, 0.6, 3.5), Some(3.0));
        assert_eq!(idx.first_reach(&f, 1.0, 1.0), Some(1.5));
        assert_eq!(idx.first_reach(&f, 1.2, 0.5), Some(1.25));
        assert_eq!(idx.first_reach(&f, 1.3, 0.5), Some(1.3));
        assert_eq!(idx.first_reach(&f, 3.5, 6.0), None);
    }

    #[test]
    fn rejects_bad_configs() {
        let mg1 = Mg1::new(DiscreteDist::point_mass(1.0).unwrap(), 0.5).unwrap();
        assert!(simulate(&cfg(mg1.clone(), PolicySpec::Fcfs, 10)).is_err());
        assert!(matches!(
            simulate(&cfg(mg1.clone(), PolicySpec::Ps, 20_000)),
            Err(Error::Unsupported(_))
        ));
        let mut c = cfg(mg1, PolicySpec::Fcfs, 20_000);
        c.batches = 3;
        assert!(simulate(&c).is_err());
    }

    #[test]
    fn idle_system_response_is_size() {
        let d = DiscreteDist::new([(1.0, 0.5), (2.0, 0.5)]).unwrap();
        let mg1 = Mg1::new(d, 0.0).unwrap();
        let mut sizes_ok = true;
        let r = simulate_traced(&cfg(mg1, PolicySpec::Gittins, 20_000), |ev: TraceEvent| {
            sizes_ok &= ev.age == 1.0 || ev.age == 2.0;
        })
        .unwrap();
        assert!(sizes_ok);
        assert!((r.mean_response - 1.5).abs() < 0.02);
    }

    #[test]
    fn reproducible_per_seed() {
        let mg1 = Mg1::new(DiscreteDist::pathological(0.1).unwrap(), 0.5).unwrap();
        let a = simulate(&cfg(mg1.clone(), PolicySpec::Gittins, 20_000)).unwrap();
        let b = simulate(&cfg(mg1, PolicySpec::Gittins, 20_000)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn fb_shares_processor_between_tied_jobs() {
        // Two size-1 jobs arriving together under FB finish together at 2.
        let mg1 = Mg1::new(DiscreteDist::point_mass(1.0).unwrap(), 1.0e-9).unwrap();
        let ranker = build_ranker(&cfg(mg1, PolicySpec::Fb, 20_000)).unwrap();
        let mut events = Vec::new();
        let mut engine = Engine {
            ranker: &ranker,
            waiting: BTreeMap::new(),
            served: Served::Idle,
            now: 0.0,
            busy: 0.0,
            completed_work: 0.0,
            tracer: (),
            scratch: Vec::new(),
        };
        for id in 0..2 {
            engine.push_job(Job {
                id,
                size: 1.0,
                age: 0.0,
                arrival: 0.0,
            });
        }
        engine.select();
        let mut sink = |t: f64| events.push(t);
        while !matches!(engine.served, Served::Idle) {
            let (dt, kind) = engine.next_internal();
            engine.advance(dt);
            engine.fire(kind, &mut sink);
        }
        assert_eq!(events.len(), 2);
        for t in events {
            assert!((t - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn valley_level_on_pathological() {
        // M-SERPT on pathological(0.1): the valley (0.9, 1) sits at level
        // 1.1, above the rank 1.01 of a fresh job, and ends at the hill 1.
        let d = DiscreteDist::pathological(0.1).unwrap();
        let f = policy_rank(&PolicySpec::MSerpt, &d).unwrap();
        assert!(f.value(0.0) < f.value(0.95));
        assert_eq!(f.value(0.9), f.value(0.95));
        assert_eq!(f.next_breakpoint(0.95), Some(1.0));
    }
}

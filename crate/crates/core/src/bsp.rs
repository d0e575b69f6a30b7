//! In-process bulk-synchronous runtime.
//!
//! [`run_team`] starts `p` worker threads that all execute the same program.
//! Workers own their data between barriers and may interact only through the
//! collectives on [`Worker`]; anything posted during a collective becomes
//! visible to its recipients strictly after the barrier that ends the
//! superstep. Every collective stamps the caller's superstep counter and
//! collective kind so that misaligned teams fail with an error instead of
//! exchanging mismatched data, and barrier waits carry a timeout so that a
//! worker skipping a collective surfaces as a deadlock diagnostic rather
//! than a hang.

use std::any::Any;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Condvar, Mutex};
use std::time::{Duration, Instant};

use crate::types::Key;
use crate::BspError;

/// Index of a worker within its team, in `[0, p)`.
pub type WorkerId = usize;

/// A full exchange's routing plan: `counts[k][j]` keys travel from worker
/// `k` to worker `j`. Row sums are the senders' outgoing totals and column
/// sums the receivers' incoming totals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExchangePlan {
    counts: Vec<Vec<u64>>,
}

impl ExchangePlan {
    /// Assembles a plan from one count row per sender (as produced by
    /// gathering each worker's per-destination counts). All rows must have
    /// length `p`.
    pub fn from_rows(rows: Vec<Vec<u64>>) -> Result<Self, BspError> {
        let p = rows.len();
        if let Some(bad) = rows.iter().position(|r| r.len() != p) {
            return Err(BspError::Protocol(format!(
                "exchange plan row {bad} has {} entries, team size is {p}",
                rows[bad].len()
            )));
        }
        Ok(ExchangePlan { counts: rows })
    }

    pub fn team_size(&self) -> usize {
        self.counts.len()
    }

    pub fn count(&self, from: WorkerId, to: WorkerId) -> u64 {
        self.counts[from][to]
    }

    /// Keys worker `k` sends in total.
    pub fn row_sum(&self, from: WorkerId) -> u64 {
        self.counts[from].iter().sum()
    }

    /// Keys worker `j` receives in total.
    pub fn column_sum(&self, to: WorkerId) -> u64 {
        self.counts.iter().map(|row| row[to]).sum()
    }

    /// Exclusive prefix of the senders' contributions to `to`: entry `k` is
    /// the offset at which worker `k`'s block starts within the received
    /// concatenation.
    pub fn offsets_for(&self, to: WorkerId) -> Vec<u64> {
        let mut offsets = Vec::with_capacity(self.counts.len());
        let mut sum = 0u64;
        for row in &self.counts {
            offsets.push(sum);
            sum += row[to];
        }
        offsets
    }
}

/// Team-wide knobs. The timeout bounds every barrier wait; it exists for
/// deadlock detection, not pacing, so the default is generous.
#[derive(Debug, Clone)]
pub struct TeamOptions {
    pub timeout: Duration,
}

impl Default for TeamOptions {
    fn default() -> Self {
        TeamOptions {
            timeout: Duration::from_secs(60),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    AllToAll = 1,
    GatherCounters = 2,
    Broadcast = 3,
}

impl Kind {
    fn from_bits(bits: u64) -> &'static str {
        match bits {
            1 => "all_to_all",
            2 => "gather_counters",
            3 => "broadcast",
            _ => "unknown",
        }
    }
}

#[derive(Debug, Clone)]
enum Abort {
    Panic { worker: WorkerId, message: String },
    Failed { worker: WorkerId },
}

struct BarrierState {
    arrived: usize,
    generation: u64,
    abort: Option<Abort>,
}

type Message = Box<dyn Any + Send>;
type BroadcastPost = (WorkerId, Option<Arc<Vec<Key>>>);

struct Shared {
    p: usize,
    timeout: Duration,
    lock: Mutex<BarrierState>,
    cv: Condvar,
    /// `mailboxes[dest][src]`: point-to-point payloads for all_to_all.
    mailboxes: Vec<Vec<Mutex<Option<Message>>>>,
    /// One shared-read slot per worker for gather_counters.
    rows: Vec<Mutex<Option<Arc<Vec<u64>>>>>,
    /// One shared-read slot per worker for broadcast.
    posts: Vec<Mutex<Option<BroadcastPost>>>,
    /// kind << 56 | superstep, written by each worker as it enters a collective.
    stamps: Vec<AtomicU64>,
}

impl Shared {
    fn new(p: usize, timeout: Duration) -> Self {
        Shared {
            p,
            timeout,
            lock: Mutex::new(BarrierState {
                arrived: 0,
                generation: 0,
                abort: None,
            }),
            cv: Condvar::new(),
            mailboxes: (0..p)
                .map(|_| (0..p).map(|_| Mutex::new(None)).collect())
                .collect(),
            rows: (0..p).map(|_| Mutex::new(None)).collect(),
            posts: (0..p).map(|_| Mutex::new(None)).collect(),
            stamps: (0..p).map(|_| AtomicU64::new(0)).collect(),
        }
    }

    fn abort(&self, abort: Abort) {
        let mut st = self.lock.lock().unwrap();
        if st.abort.is_none() {
            st.abort = Some(abort);
            self.cv.notify_all();
        }
    }

    fn abort_error(&self, abort: &Abort) -> BspError {
        match abort {
            Abort::Panic { worker, message } => BspError::WorkerPanic {
                worker: *worker,
                message: message.clone(),
            },
            Abort::Failed { worker } => BspError::Aborted { worker: *worker },
        }
    }

    fn barrier(&self, me: WorkerId, superstep: u64) -> Result<(), BspError> {
        let mut st = self.lock.lock().unwrap();
        if let Some(a) = &st.abort {
            return Err(self.abort_error(a));
        }
        let generation = st.generation;
        st.arrived += 1;
        if st.arrived == self.p {
            st.arrived = 0;
            st.generation += 1;
            self.cv.notify_all();
            return Ok(());
        }
        let deadline = Instant::now() + self.timeout;
        loop {
            let now = Instant::now();
            if now >= deadline {
                // Suspected deadlock: poison the team so peers unwind too.
                if st.abort.is_none() {
                    st.abort = Some(Abort::Failed { worker: me });
                    self.cv.notify_all();
                }
                return Err(BspError::Timeout {
                    worker: me,
                    superstep,
                });
            }
            let (guard, _) = self.cv.wait_timeout(st, deadline - now).unwrap();
            st = guard;
            if st.generation != generation {
                return Ok(());
            }
            if let Some(a) = &st.abort {
                return Err(self.abort_error(a));
            }
        }
    }
}

/// Per-worker handle to the team: identifies the worker and provides the
/// collectives. One superstep = one collective call made by every worker.
pub struct Worker<'t> {
    id: WorkerId,
    superstep: u64,
    shared: &'t Shared,
}

impl<'t> Worker<'t> {
    pub fn id(&self) -> WorkerId {
        self.id
    }

    pub fn team_size(&self) -> usize {
        self.shared.p
    }

    /// Index of the superstep the worker is currently in (collectives so far).
    pub fn superstep(&self) -> u64 {
        self.superstep
    }

    fn enter(&mut self, kind: Kind) -> u64 {
        self.superstep += 1;
        let stamp = ((kind as u64) << 56) | self.superstep;
        self.shared.stamps[self.id].store(stamp, Ordering::SeqCst);
        stamp
    }

    fn check_stamps(&self, mine: u64) -> Result<(), BspError> {
        for (worker, stamp) in self.shared.stamps.iter().enumerate() {
            let theirs = stamp.load(Ordering::SeqCst);
            if theirs == mine {
                continue;
            }
            let (my_step, their_step) = (mine & STEP_MASK, theirs & STEP_MASK);
            if my_step != their_step {
                return Err(BspError::SuperstepMismatch {
                    worker,
                    expected: my_step,
                    found: their_step,
                });
            }
            return Err(BspError::Protocol(format!(
                "worker {} entered {} while worker {} entered {} at superstep {}",
                self.id,
                Kind::from_bits(mine >> 56),
                worker,
                Kind::from_bits(theirs >> 56),
                my_step,
            )));
        }
        Ok(())
    }

    /// Full exchange: `outgoing[j]` is delivered to worker `j`, and the
    /// result holds one block per sender in worker-id order. The multiset of
    /// items across the team is preserved.
    pub fn all_to_all<T: Send + 'static>(
        &mut self,
        mut outgoing: Vec<Vec<T>>,
    ) -> Result<Vec<Vec<T>>, BspError> {
        let p = self.shared.p;
        if outgoing.len() != p {
            return Err(BspError::Protocol(format!(
                "all_to_all requires {} outgoing blocks, got {}",
                p,
                outgoing.len()
            )));
        }
        let stamp = self.enter(Kind::AllToAll);
        for (dest, block) in outgoing.drain(..).enumerate() {
            *self.shared.mailboxes[dest][self.id].lock().unwrap() = Some(Box::new(block));
        }
        self.shared.barrier(self.id, self.superstep)?;
        self.check_stamps(stamp)?;
        let mut received = Vec::with_capacity(p);
        for src in 0..p {
            let msg = self.shared.mailboxes[self.id][src]
                .lock()
                .unwrap()
                .take()
                .ok_or_else(|| BspError::Protocol(format!("no message from worker {src}")))?;
            let block = msg.downcast::<Vec<T>>().map_err(|_| {
                BspError::Protocol(format!("message type mismatch from worker {src}"))
            })?;
            received.push(*block);
        }
        self.shared.barrier(self.id, self.superstep)?;
        Ok(received)
    }

    /// Every worker contributes one counter array of a common length `r`;
    /// every worker ends up with the full `p x r` matrix, row `k` from
    /// worker `k`.
    pub fn gather_counters(&mut self, local: Vec<u64>) -> Result<Vec<Arc<Vec<u64>>>, BspError> {
        let stamp = self.enter(Kind::GatherCounters);
        *self.shared.rows[self.id].lock().unwrap() = Some(Arc::new(local));
        self.shared.barrier(self.id, self.superstep)?;
        self.check_stamps(stamp)?;
        let mut matrix = Vec::with_capacity(self.shared.p);
        for src in 0..self.shared.p {
            let row = self.shared.rows[src]
                .lock()
                .unwrap()
                .clone()
                .ok_or_else(|| BspError::Protocol(format!("no counter row from worker {src}")))?;
            matrix.push(row);
        }
        let r = matrix[0].len();
        if let Some(bad) = matrix.iter().position(|row| row.len() != r) {
            let got = matrix[bad].len();
            return Err(BspError::Protocol(format!(
                "counter rows must share one length: worker 0 sent {r}, worker {bad} sent {got}"
            )));
        }
        self.shared.barrier(self.id, self.superstep)?;
        Ok(matrix)
    }

    /// One designated source distributes a key block; all workers receive an
    /// identical copy. The source passes `Some(payload)`, everyone else
    /// `None`, and all workers must agree on `from`.
    pub fn broadcast(
        &mut self,
        from: WorkerId,
        payload: Option<Vec<Key>>,
    ) -> Result<Vec<Key>, BspError> {
        let stamp = self.enter(Kind::Broadcast);
        *self.shared.posts[self.id].lock().unwrap() = Some((from, payload.map(Arc::new)));
        self.shared.barrier(self.id, self.superstep)?;
        self.check_stamps(stamp)?;
        let mut result: Option<Arc<Vec<Key>>> = None;
        for src in 0..self.shared.p {
            let (their_from, their_payload) = self.shared.posts[src]
                .lock()
                .unwrap()
                .clone()
                .ok_or_else(|| {
                    BspError::Protocol(format!("no broadcast post from worker {src}"))
                })?;
            if their_from != from {
                return Err(BspError::Protocol(format!(
                    "broadcast source disagreement: worker {} expects {}, worker {} expects {}",
                    self.id, from, src, their_from
                )));
            }
            match (src == from, their_payload) {
                (true, Some(p)) => result = Some(p),
                (true, None) => {
                    return Err(BspError::Protocol(format!(
                        "broadcast source {from} supplied no payload"
                    )))
                }
                (false, Some(_)) => {
                    return Err(BspError::Protocol(format!(
                        "multiple broadcast sources: worker {src} also posted a payload"
                    )))
                }
                (false, None) => {}
            }
        }
        let payload = result.expect("source payload checked above");
        self.shared.barrier(self.id, self.superstep)?;
        Ok((*payload).clone())
    }
}

const STEP_MASK: u64 = (1 << 56) - 1;

fn panic_message(payload: Box<dyn Any + Send>) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        (*s).to_string()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else {
        "unknown panic payload".to_string()
    }
}

/// Runs `program` on `p` workers, handing worker `k` ownership of
/// `inputs[k]`. Results come back indexed by worker id. A panicking or
/// failing worker aborts the whole team; the returned error names it.
pub fn run_team<I, R, F>(p: usize, inputs: Vec<I>, program: F) -> Result<Vec<R>, BspError>
where
    I: Send,
    R: Send,
    F: Fn(&mut Worker<'_>, I) -> Result<R, BspError> + Sync,
{
    run_team_with(TeamOptions::default(), p, inputs, program)
}

pub fn run_team_with<I, R, F>(
    options: TeamOptions,
    p: usize,
    inputs: Vec<I>,
    program: F,
) -> Result<Vec<R>, BspError>
where
    I: Send,
    R: Send,
    F: Fn(&mut Worker<'_>, I) -> Result<R, BspError> + Sync,
{
    if p == 0 {
        return Err(BspError::Protocol("team size must be at least 1".into()));
    }
    if inputs.len() != p {
        return Err(BspError::Protocol(format!(
            "expected {} worker inputs, got {}",
            p,
            inputs.len()
        )));
    }
    let shared = Shared::new(p, options.timeout);
    let slots: Vec<Mutex<Option<Result<R, BspError>>>> = (0..p).map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for (id, input) in inputs.into_iter().enumerate() {
            let shared = &shared;
            let program = &program;
            let slots = &slots;
            scope.spawn(move || {
                let outcome = catch_unwind(AssertUnwindSafe(|| {
                    let mut worker = Worker {
                        id,
                        superstep: 0,
                        shared,
                    };
                    program(&mut worker, input)
                }));
                let result = match outcome {
                    Ok(result) => {
                        if result.is_err() {
                            shared.abort(Abort::Failed { worker: id });
                        }
                        result
                    }
                    Err(payload) => {
                        let message = panic_message(payload);
                        shared.abort(Abort::Panic {
                            worker: id,
                            message: message.clone(),
                        });
                        Err(BspError::WorkerPanic {
                            worker: id,
                            message,
                        })
                    }
                };
                *slots[id].lock().unwrap() = Some(result);
            });
        }
    });

    let mut results = Vec::with_capacity(p);
    let mut errors: Vec<BspError> = Vec::new();
    for slot in slots {
        match slot.into_inner().unwrap().expect("worker wrote a result") {
            Ok(r) => results.push(r),
            Err(e) => errors.push(e),
        }
    }
    if errors.is_empty() {
        return Ok(results);
    }
    // Report the most informative failure: a panic beats the secondary
    // errors the rest of the team sees while unwinding.
    let rank = |e: &BspError| match e {
        BspError::WorkerPanic { .. } => 0,
        BspError::SuperstepMismatch { .. } => 1,
        BspError::Protocol(_) => 2,
        BspError::Timeout { .. } => 3,
        BspError::Aborted { .. } => 4,
    };
    errors.sort_by_key(rank);
    Err(errors.remove(0))
}

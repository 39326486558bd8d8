//! Ordered eye-movement type sequences.
//!
//! With target counts, every free position picks type `T` with probability
//! `remaining(T) / sum(remaining)`. Ordering rules are enforced by repair:
//! a draw that would break a rule (or make the remainder impossible to
//! arrange) is replaced by the forced type, falling back to a weighted draw
//! over the types that keep the remainder satisfiable. Satisfiability is
//! decided exactly by a memoized search over (remaining counts, last type).

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::signal::MovementLabel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderingRule {
    /// Every `A` is immediately followed by `B`.
    AfterEach(MovementLabel, MovementLabel),
    /// Every `B` is immediately preceded by `A`.
    Before(MovementLabel, MovementLabel),
}

impl fmt::Display for OrderingRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = |l: &MovementLabel| match l {
            MovementLabel::Fixation => "fixation",
            MovementLabel::Saccade => "saccade",
            MovementLabel::SmoothPursuit => "smooth_pursuit",
            MovementLabel::Noise => "noise",
        };
        match self {
            OrderingRule::AfterEach(a, b) => write!(f, "after_each({}, {})", name(a), name(b)),
            OrderingRule::Before(a, b) => write!(f, "before({}, {})", name(a), name(b)),
        }
    }
}

impl OrderingRule {
    fn pair(&self) -> (MovementLabel, MovementLabel) {
        match *self {
            OrderingRule::AfterEach(a, b) | OrderingRule::Before(a, b) => (a, b),
        }
    }

    fn validate(&self) -> Result<()> {
        let (a, b) = self.pair();
        if a == b {
            return Err(Error::Constraint {
                rule: self.to_string(),
                reason: "a rule must relate two different types".into(),
            });
        }
        if !a.is_movement() || !b.is_movement() {
            return Err(Error::Constraint {
                rule: self.to_string(),
                reason: "noise cannot take part in ordering rules".into(),
            });
        }
        Ok(())
    }

    /// Whether `seq` satisfies this rule; on failure, the offending index.
    pub fn check(&self, seq: &[MovementLabel]) -> std::result::Result<(), usize> {
        match *self {
            OrderingRule::AfterEach(a, b) => {
                for (i, &t) in seq.iter().enumerate() {
                    if t == a && seq.get(i + 1) != Some(&b) {
                        return Err(i);
                    }
                }
            }
            OrderingRule::Before(a, b) => {
                for (i, &t) in seq.iter().enumerate() {
                    if t == b && (i == 0 || seq[i - 1] != a) {
                        return Err(i);
                    }
                }
            }
        }
        Ok(())
    }
}

/// First rule violated by `seq`, with the offending position.
pub fn violated_rule(seq: &[MovementLabel], rules: &[OrderingRule]) -> Option<(OrderingRule, usize)> {
    rules
        .iter()
        .find_map(|r| r.check(seq).err().map(|pos| (*r, pos)))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceSpec {
    /// Target quantity per movement type.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<BTreeMap<MovementLabel, usize>>,
    /// Total length for equiprobable selection when `counts` is absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<usize>,
    #[serde(default)]
    pub rules: Vec<OrderingRule>,
    /// Fully manual sequence, returned verbatim after rule validation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explicit: Option<Vec<MovementLabel>>,
}

impl SequenceSpec {
    pub fn with_counts(counts: &[(MovementLabel, usize)]) -> Self {
        Self {
            counts: Some(counts.iter().copied().collect()),
            ..Self::default()
        }
    }

    pub fn rule(mut self, rule: OrderingRule) -> Self {
        self.rules.push(rule);
        self
    }

    pub fn validate(&self) -> Result<()> {
        for r in &self.rules {
            r.validate()?;
        }
        if let Some(explicit) = &self.explicit {
            if explicit.is_empty() {
                return Err(Error::param("sequence.explicit", "must not be empty"));
            }
            if explicit.iter().any(|l| !l.is_movement()) {
                return Err(Error::param("sequence.explicit", "noise is not a movement type"));
            }
            return Ok(());
        }
        match (&self.counts, self.length) {
            (Some(counts), _) => {
                if counts.contains_key(&MovementLabel::Noise) {
                    return Err(Error::param("sequence.counts", "noise is not a movement type"));
                }
                if counts.values().sum::<usize>() == 0 {
                    return Err(Error::param("sequence.counts", "at least one movement required"));
                }
            }
            (None, Some(0)) | (None, None) => {
                return Err(Error::param(
                    "sequence",
                    "give counts, a positive length or an explicit sequence",
                ))
            }
            (None, Some(_)) => {}
        }
        Ok(())
    }
}

/// Rule set compiled to per-type forced neighbours.
#[derive(Debug, Clone)]
struct Adjacency {
    succ: [Option<usize>; 3],
    pred: [Option<usize>; 3],
    /// Types with two different forced successors or predecessors.
    banned: [bool; 3],
}

impl Adjacency {
    fn compile(rules: &[OrderingRule]) -> Self {
        let mut adj = Adjacency {
            succ: [None; 3],
            pred: [None; 3],
            banned: [false; 3],
        };
        for r in rules {
            let (a, b) = r.pair();
            let (a, b) = (a.index(), b.index());
            let (slot, key, val) = match r {
                OrderingRule::AfterEach(..) => (&mut adj.succ, a, b),
                OrderingRule::Before(..) => (&mut adj.pred, b, a),
            };
            match slot[key] {
                Some(existing) if existing != val => adj.banned[key] = true,
                _ => slot[key] = Some(val),
            }
        }
        adj
    }

    fn legal(&self, last: Option<usize>, t: usize) -> bool {
        if self.banned[t] {
            return false;
        }
        if let Some(l) = last {
            if let Some(s) = self.succ[l] {
                if s != t {
                    return false;
                }
            }
        }
        match self.pred[t] {
            Some(p) => last == Some(p),
            None => true,
        }
    }

    fn can_end(&self, last: Option<usize>) -> bool {
        last.is_none_or(|l| self.succ[l].is_none())
    }
}

const NO_LAST: u8 = 3;
type StateKey = ([u32; 3], u8);

/// Exact satisfiability of "arrange the remaining counts after `last`".
struct Feasibility {
    adj: Adjacency,
    memo: HashMap<StateKey, bool>,
}

impl Feasibility {
    fn new(adj: Adjacency) -> Self {
        Self {
            adj,
            memo: HashMap::new(),
        }
    }

    fn child(key: StateKey, t: usize) -> StateKey {
        let mut rem = key.0;
        rem[t] -= 1;
        (rem, t as u8)
    }

    fn last(key: StateKey) -> Option<usize> {
        (key.1 != NO_LAST).then_some(key.1 as usize)
    }

    fn feasible(&mut self, rem: [u32; 3], last: Option<usize>) -> bool {
        let root: StateKey = (rem, last.map_or(NO_LAST, |l| l as u8));
        // Iterative depth-first search; sequences can be long.
        let mut stack: Vec<(StateKey, usize)> = vec![(root, 0)];
        while let Some(&(key, next)) = stack.last() {
            if self.memo.contains_key(&key) {
                stack.pop();
                continue;
            }
            if key.0 == [0, 0, 0] {
                let ok = self.adj.can_end(Self::last(key));
                self.memo.insert(key, ok);
                stack.pop();
                continue;
            }
            let mut descended = false;
            let mut resolved = None;
            for t in next..3 {
                if key.0[t] == 0 || !self.adj.legal(Self::last(key), t) {
                    continue;
                }
                let child = Self::child(key, t);
                match self.memo.get(&child) {
                    Some(true) => {
                        resolved = Some(true);
                        break;
                    }
                    Some(false) => continue,
                    None => {
                        stack.last_mut().expect("non-empty").1 = t;
                        stack.push((child, 0));
                        descended = true;
                        break;
                    }
                }
            }
            if !descended {
                self.memo.insert(key, resolved.unwrap_or(false));
                stack.pop();
            }
        }
        self.memo[&root]
    }

    fn viable(&mut self, rem: [u32; 3], last: Option<usize>, t: usize) -> bool {
        if rem[t] == 0 || !self.adj.legal(last, t) {
            return false;
        }
        let mut next = rem;
        next[t] -= 1;
        self.feasible(next, Some(t))
    }
}

fn unsatisfiable(rules: &[OrderingRule], rem: [u32; 3]) -> Error {
    // Name the first rule whose removal makes the counts arrangeable.
    for (i, r) in rules.iter().enumerate() {
        let mut others = rules.to_vec();
        others.remove(i);
        if Feasibility::new(Adjacency::compile(&others)).feasible(rem, None) {
            return Error::Constraint {
                rule: r.to_string(),
                reason: format!(
                    "no ordering of counts FIX={} SACC={} SP={} satisfies it together with the other rules",
                    rem[0], rem[1], rem[2]
                ),
            };
        }
    }
    let rule = rules
        .iter()
        .map(|r| r.to_string())
        .collect::<Vec<_>>()
        .join(" + ");
    Error::Constraint {
        rule,
        reason: format!(
            "no ordering of counts FIX={} SACC={} SP={} exists",
            rem[0], rem[1], rem[2]
        ),
    }
}

fn weighted_type(rng: &mut RandomSource, weights: [f64; 3]) -> Option<usize> {
    rng.weighted_index(&weights)
}

fn build_counted(
    counts: &BTreeMap<MovementLabel, usize>,
    rules: &[OrderingRule],
    rng: &mut RandomSource,
) -> Result<Vec<MovementLabel>> {
    let mut rem = [0u32; 3];
    for (label, &n) in counts {
        rem[label.index()] = u32::try_from(n)
            .map_err(|_| Error::param("sequence.counts", "count too large"))?;
    }
    let total: u32 = rem.iter().sum();
    let mut out = Vec::with_capacity(total as usize);

    if rules.is_empty() {
        for _ in 0..total {
            let t = weighted_type(rng, rem.map(f64::from)).expect("remaining > 0");
            rem[t] -= 1;
            out.push(MovementLabel::MOVEMENTS[t]);
        }
        return Ok(out);
    }

    let adj = Adjacency::compile(rules);
    let mut feas = Feasibility::new(adj.clone());
    if !feas.feasible(rem, None) {
        return Err(unsatisfiable(rules, rem));
    }
    let mut last: Option<usize> = None;
    while rem.iter().any(|&r| r > 0) {
        let choice = if let Some(forced) = last.and_then(|l| adj.succ[l]) {
            forced
        } else {
            let drawn = weighted_type(rng, rem.map(f64::from)).expect("remaining > 0");
            if feas.viable(rem, last, drawn) {
                drawn
            } else if let Some(p) = adj.pred[drawn].filter(|&p| feas.viable(rem, last, p)) {
                p
            } else {
                let mut w = [0.0; 3];
                for (t, wt) in w.iter_mut().enumerate() {
                    if feas.viable(rem, last, t) {
                        *wt = f64::from(rem[t]);
                    }
                }
                weighted_type(rng, w).expect("feasible state has a viable successor")
            }
        };
        debug_assert!(feas.viable(rem, last, choice));
        rem[choice] -= 1;
        last = Some(choice);
        out.push(MovementLabel::MOVEMENTS[choice]);
    }
    Ok(out)
}

fn build_uniform(
    length: usize,
    rules: &[OrderingRule],
    rng: &mut RandomSource,
) -> Result<Vec<MovementLabel>> {
    let adj = Adjacency::compile(rules);
    // A type is usable when placing it can never force a contradiction.
    let mut usable = adj.banned.map(|b| !b);
    loop {
        let mut changed = false;
        for t in 0..3 {
            if !usable[t] {
                continue;
            }
            let bad_succ = adj.succ[t]
                .is_some_and(|s| !usable[s] || adj.pred[s].is_some_and(|p| p != t));
            let bad_pred = adj.pred[t]
                .is_some_and(|p| !usable[p] || adj.succ[p].is_some_and(|s| s != t));
            if bad_succ || bad_pred {
                usable[t] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    for start in 0..3 {
        if !usable[start] {
            continue;
        }
        let mut t = start;
        for _ in 0..3 {
            match adj.succ[t] {
                Some(s) => t = s,
                None => break,
            }
        }
        if adj.succ[t].is_some() {
            let rule = rules
                .iter()
                .find(|r| matches!(r, OrderingRule::AfterEach(..)))
                .map(|r| r.to_string())
                .unwrap_or_default();
            return Err(Error::Constraint {
                rule,
                reason: "forced successors form a cycle".into(),
            });
        }
    }
    if !usable.iter().any(|&u| u) {
        return Err(unsatisfiable(rules, [1, 1, 1]));
    }
    let weights = usable.map(|u| if u { 1.0 } else { 0.0 });

    let mut out: Vec<MovementLabel> = Vec::with_capacity(length + 2);
    let mut last: Option<usize> = None;
    while out.len() < length || last.is_some_and(|l| adj.succ[l].is_some()) {
        let choice = match last.and_then(|l| adj.succ[l]) {
            Some(forced) => forced,
            None => {
                let drawn = weighted_type(rng, weights).expect("some type usable");
                match adj.pred[drawn] {
                    Some(p) if last != Some(p) => p,
                    _ => drawn,
                }
            }
        };
        last = Some(choice);
        out.push(MovementLabel::MOVEMENTS[choice]);
    }
    Ok(out)
}

/// Build the movement-type sequence for a run.
pub fn build_sequence(spec: &SequenceSpec, rng: &mut RandomSource) -> Result<Vec<MovementLabel>> {
    spec.validate()?;
    if let Some(explicit) = &spec.explicit {
        if let Some((rule, pos)) = violated_rule(explicit, &spec.rules) {
            return Err(Error::Constraint {
                rule: rule.to_string(),
                reason: format!("explicit sequence violates it at position {pos}"),
            });
        }
        return Ok(explicit.clone());
    }
    match (&spec.counts, spec.length) {
        (Some(counts), _) => build_counted(counts, &spec.rules, rng),
        (None, Some(length)) => build_uniform(length, &spec.rules, rng),
        (None, None) => unreachable!("validated"),
    }
}

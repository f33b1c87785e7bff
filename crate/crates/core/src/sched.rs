//! Service policies for one slot.
//!
//! State is kept as counts per residual deadline: within a bucket requests
//! are indistinguishable. Every function here is a pure transition; callers
//! thread the returned state into the next slot.
//!
//! Per-slot order: arrivals land ([`advance_slot`]), the policy serves,
//! anything still at residual deadline 0 expires, and the next call to
//! [`advance_slot`] shifts deadlines down by one.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::traffic::ArrivalBatch;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SchedError {
    #[error("arrival look-ahead {lookahead} exceeds backlog horizon {horizon}")]
    LookaheadBeyondHorizon { lookahead: usize, horizon: usize },
    #[error("multicast source {source_id} outside [0, {sources})")]
    UnknownSource { source_id: u32, sources: u32 },
    #[error("backlog counter overflow")]
    Overflow,
}

/// Requests waiting for service, by residual deadline.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Backlog {
    counts: Vec<u64>,
}

impl Backlog {
    /// Empty backlog able to hold deadlines `0..=horizon`.
    pub fn new(horizon: u32) -> Self {
        Self {
            counts: vec![0; horizon as usize + 1],
        }
    }

    pub fn from_counts(counts: Vec<u64>) -> Self {
        assert!(
            !counts.is_empty(),
            "backlog needs at least the urgent bucket"
        );
        Self { counts }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn horizon(&self) -> u32 {
        (self.counts.len() - 1) as u32
    }

    /// Requests whose deadline is the current slot.
    pub fn urgent(&self) -> u64 {
        self.counts[0]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Requests with residual deadline of at least one slot.
    pub fn deferrable(&self) -> u64 {
        self.counts[1..].iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.iter().all(|&n| n == 0)
    }

    /// Remove what `outcome` served and drop what expired.
    pub fn after_service(&self, outcome: &ServiceOutcome) -> Backlog {
        let mut counts = self.counts.clone();
        for (n, s) in counts.iter_mut().zip(&outcome.served_per_deadline) {
            *n -= s;
        }
        counts[0] = 0;
        Backlog { counts }
    }
}

/// What one service step did for one traffic class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServiceOutcome {
    pub served_per_deadline: Vec<u64>,
    pub leftover_capacity: u64,
    /// Requests still at residual deadline 0 after service.
    pub expired: u64,
}

impl ServiceOutcome {
    pub fn served(&self) -> u64 {
        self.served_per_deadline.iter().sum()
    }

    pub fn is_outage(&self) -> bool {
        self.expired > 0
    }
}

/// Earliest-deadline-first within `capacity`.
pub fn edf_serve(backlog: &Backlog, capacity: u64) -> ServiceOutcome {
    let mut remaining = capacity;
    let served_per_deadline: Vec<u64> = backlog
        .counts
        .iter()
        .map(|&n| {
            let s = n.min(remaining);
            remaining -= s;
            s
        })
        .collect();
    let expired = backlog.counts[0] - served_per_deadline[0];
    ServiceOutcome {
        served_per_deadline,
        leftover_capacity: remaining,
        expired,
    }
}

/// Shift residual deadlines down one slot and insert the new arrivals.
///
/// The urgent bucket of `backlog` is discarded: after a service step it holds
/// nothing, since unserved urgent requests have already expired.
pub fn advance_slot(backlog: &Backlog, arrivals: &ArrivalBatch) -> Result<Backlog, SchedError> {
    let len = backlog.counts.len();
    let mut counts = Vec::with_capacity(len);
    counts.extend_from_slice(&backlog.counts[1..]);
    counts.push(0);
    for (k, &q) in arrivals.per_lookahead.iter().enumerate() {
        if q == 0 {
            continue;
        }
        if k >= len {
            return Err(SchedError::LookaheadBeyondHorizon {
                lookahead: k,
                horizon: len - 1,
            });
        }
        counts[k] = counts[k].checked_add(q).ok_or(SchedError::Overflow)?;
    }
    Ok(Backlog { counts })
}

/// Rounding applied to the fractional share `f * sum_{i>=1} N_i`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FractionRounding {
    #[default]
    Ceil,
    Floor,
}

/// Primary capacity under dynamic assignment: `min{C, N_0 + ceil(f * sum_{i>=1} N_i)}`.
pub fn dynamic_primary_capacity(primary: &Backlog, capacity: u64, f: f64) -> u64 {
    dynamic_primary_capacity_with(primary, capacity, f, FractionRounding::Ceil)
}

pub fn dynamic_primary_capacity_with(
    primary: &Backlog,
    capacity: u64,
    f: f64,
    rounding: FractionRounding,
) -> u64 {
    let share = f * primary.deferrable() as f64;
    // products such as 0.1 * 30 land a hair above the integer
    let nearest = share.round();
    let share = if (share - nearest).abs() < 1e-9 {
        nearest
    } else {
        match rounding {
            FractionRounding::Ceil => share.ceil(),
            FractionRounding::Floor => share.floor(),
        }
    };
    let wanted = primary.urgent().saturating_add(share as u64);
    capacity.min(wanted)
}

/// How the primary class claims capacity when sharing with secondary traffic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PrimaryMode {
    /// Primary serves its whole backlog (up to `C`) before any secondary request.
    SelfishPrimary,
    /// Primary caps itself at the dynamic capacity with fraction `f`.
    DynamicPrimary { f: f64, rounding: FractionRounding },
}

impl PrimaryMode {
    pub fn dynamic(f: f64) -> Self {
        PrimaryMode::DynamicPrimary {
            f,
            rounding: FractionRounding::Ceil,
        }
    }
}

/// Serve primary per `mode`, then give the leftover to the urgent secondary requests.
pub fn serve_two_class(
    primary: &Backlog,
    secondary_urgent: u64,
    capacity: u64,
    mode: PrimaryMode,
) -> (ServiceOutcome, ServiceOutcome) {
    let primary_cap = match mode {
        PrimaryMode::SelfishPrimary => capacity,
        PrimaryMode::DynamicPrimary { f, rounding } => {
            dynamic_primary_capacity_with(primary, capacity, f, rounding)
        }
    };
    let mut p_out = edf_serve(primary, primary_cap);
    let leftover = capacity - p_out.served();
    p_out.leftover_capacity = leftover;
    let s_served = secondary_urgent.min(leftover);
    let s_out = ServiceOutcome {
        served_per_deadline: vec![s_served],
        leftover_capacity: leftover - s_served,
        expired: secondary_urgent - s_served,
    };
    (p_out, s_out)
}

/// Pending multicast demand with alignment: one unit of capacity serves every
/// pending request for a data source.
///
/// Each source keeps a bit set of the residual deadlines of its pending
/// requests; its effective deadline is the smallest one. Serving a source
/// clears all of its bits.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MulticastBacklog {
    horizon: u32,
    pending: Vec<u64>,
}

impl MulticastBacklog {
    pub const MAX_HORIZON: u32 = 63;

    pub fn new(sources: u32, horizon: u32) -> Self {
        assert!(
            horizon <= Self::MAX_HORIZON,
            "multicast horizon above {}",
            Self::MAX_HORIZON
        );
        Self {
            horizon,
            pending: vec![0; sources as usize],
        }
    }

    /// Build from `(source, residual deadline)` pairs.
    pub fn from_deadlines(sources: u32, horizon: u32, entries: &[(u32, u32)]) -> Self {
        let mut mb = Self::new(sources, horizon);
        for &(id, d) in entries {
            assert!(d <= horizon);
            mb.pending[id as usize] |= 1 << d;
        }
        mb
    }

    pub fn sources(&self) -> u32 {
        self.pending.len() as u32
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    /// Effective residual deadline of `source`, if it has pending requests.
    pub fn residual_deadline(&self, source: u32) -> Option<u32> {
        let mask = *self.pending.get(source as usize)?;
        (mask != 0).then(|| mask.trailing_zeros())
    }

    /// Sources with at least one pending request.
    pub fn len(&self) -> usize {
        self.pending.iter().filter(|&&m| m != 0).count()
    }

    pub fn is_empty(&self) -> bool {
        self.pending.iter().all(|&m| m == 0)
    }

    /// Sources whose earliest request expires this slot.
    pub fn urgent(&self) -> u64 {
        self.pending.iter().filter(|&&m| m & 1 == 1).count() as u64
    }

    pub fn masks(&self) -> &[u64] {
        &self.pending
    }

    pub fn from_masks(horizon: u32, pending: Vec<u64>) -> Self {
        Self { horizon, pending }
    }

    /// Sources ordered by (effective deadline, id).
    fn edf_order(&self) -> Vec<u32> {
        let mut order: Vec<(u32, u32)> = self
            .pending
            .iter()
            .enumerate()
            .filter(|(_, &m)| m != 0)
            .map(|(id, &m)| (m.trailing_zeros(), id as u32))
            .collect();
        order.sort_unstable();
        order.into_iter().map(|(_, id)| id).collect()
    }

    /// Clear served sources, then drop requests that expired at deadline 0.
    pub fn after_service(&self, served: &[u32]) -> MulticastBacklog {
        let mut pending = self.pending.clone();
        for &id in served {
            pending[id as usize] = 0;
        }
        for m in &mut pending {
            *m &= !1;
        }
        MulticastBacklog {
            horizon: self.horizon,
            pending,
        }
    }

    /// Shift deadlines down one slot and register this slot's demanded sources
    /// at look-ahead `lookahead`.
    pub fn advance(
        &self,
        arrivals: &ArrivalBatch,
        lookahead: u32,
    ) -> Result<MulticastBacklog, SchedError> {
        if lookahead > self.horizon {
            return Err(SchedError::LookaheadBeyondHorizon {
                lookahead: lookahead as usize,
                horizon: self.horizon as usize,
            });
        }
        let mut pending: Vec<u64> = self.pending.iter().map(|m| m >> 1).collect();
        for &id in &arrivals.multicast_sources {
            let slot = pending
                .get_mut(id as usize)
                .ok_or(SchedError::UnknownSource {
                    source_id: id,
                    sources: self.sources(),
                })?;
            *slot |= 1 << lookahead;
        }
        Ok(MulticastBacklog {
            horizon: self.horizon,
            pending,
        })
    }
}

/// Multicast service result: the class outcome plus which sources were served.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MulticastService {
    pub outcome: ServiceOutcome,
    pub served_sources: Vec<u32>,
}

fn serve_sources(
    mb: &MulticastBacklog,
    order: &[u32],
    capacity: u64,
    served: &mut Vec<u32>,
    per_deadline: &mut [u64],
) -> u64 {
    let mut remaining = capacity;
    for &id in order {
        if remaining == 0 {
            break;
        }
        let d = mb.pending[id as usize].trailing_zeros() as usize;
        per_deadline[d] += 1;
        served.push(id);
        remaining -= 1;
    }
    remaining
}

fn multicast_expired(mb: &MulticastBacklog, served: &[u32]) -> u64 {
    mb.urgent()
        - served
            .iter()
            .filter(|&&id| mb.pending[id as usize] & 1 == 1)
            .count() as u64
}

/// Aligned EDF over data sources; ties go to the lower source id.
pub fn multicast_edf_serve(mb: &MulticastBacklog, capacity: u64) -> MulticastService {
    let order = mb.edf_order();
    let mut served = Vec::new();
    let mut per_deadline = vec![0; mb.horizon as usize + 1];
    let leftover = serve_sources(mb, &order, capacity, &mut served, &mut per_deadline);
    let expired = multicast_expired(mb, &served);
    MulticastService {
        outcome: ServiceOutcome {
            served_per_deadline: per_deadline,
            leftover_capacity: leftover,
            expired,
        },
        served_sources: served,
    }
}

/// Result of a combined multicast + unicast service step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixedService {
    pub multicast: MulticastService,
    pub unicast: ServiceOutcome,
}

impl MixedService {
    /// Combined outage: an expiring multicast source or an expiring unicast request.
    pub fn is_outage(&self) -> bool {
        self.multicast.outcome.expired + self.unicast.expired > 0
    }
}

/// Urgent multicast sources first, then urgent unicast requests, then the
/// remaining multicast sources by EDF.
pub fn pi2_serve(mb: &MulticastBacklog, unicast_urgent: u64, capacity: u64) -> MixedService {
    let order = mb.edf_order();
    let split = order.partition_point(|&id| mb.pending[id as usize] & 1 == 1);
    let (urgent, rest) = order.split_at(split);
    let mut served = Vec::new();
    let mut per_deadline = vec![0; mb.horizon as usize + 1];

    let remaining = serve_sources(mb, urgent, capacity, &mut served, &mut per_deadline);
    let u_served = unicast_urgent.min(remaining);
    let remaining = remaining - u_served;
    let remaining = serve_sources(mb, rest, remaining, &mut served, &mut per_deadline);

    let expired = multicast_expired(mb, &served);
    MixedService {
        multicast: MulticastService {
            outcome: ServiceOutcome {
                served_per_deadline: per_deadline,
                leftover_capacity: remaining,
                expired,
            },
            served_sources: served,
        },
        unicast: ServiceOutcome {
            served_per_deadline: vec![u_served],
            leftover_capacity: remaining,
            expired: unicast_urgent - u_served,
        },
    }
}

/// Joint EDF over multicast sources and unicast requests. At equal residual
/// deadline multicast sources go first.
pub fn mixed_edf_serve(mb: &MulticastBacklog, unicast: &Backlog, capacity: u64) -> MixedService {
    let order = mb.edf_order();
    let depth = (mb.horizon.max(unicast.horizon())) as usize + 1;
    let mut served = Vec::new();
    let mut m_per_deadline = vec![0; mb.horizon as usize + 1];
    let mut u_per_deadline = Vec::with_capacity(unicast.counts.len());
    let mut remaining = capacity;
    let mut cursor = 0;
    for d in 0..depth {
        let end = cursor
            + order[cursor..]
                .partition_point(|&id| mb.pending[id as usize].trailing_zeros() as usize <= d);
        remaining = serve_sources(
            mb,
            &order[cursor..end],
            remaining,
            &mut served,
            &mut m_per_deadline,
        );
        cursor = end;
        if let Some(&n) = unicast.counts.get(d) {
            let s = n.min(remaining);
            u_per_deadline.push(s);
            remaining -= s;
        }
    }
    let expired = multicast_expired(mb, &served);
    MixedService {
        multicast: MulticastService {
            outcome: ServiceOutcome {
                served_per_deadline: m_per_deadline,
                leftover_capacity: remaining,
                expired,
            },
            served_sources: served,
        },
        unicast: ServiceOutcome {
            leftover_capacity: remaining,
            expired: unicast.counts[0] - u_per_deadline[0],
            served_per_deadline: u_per_deadline,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn batch(per_lookahead: Vec<u64>) -> ArrivalBatch {
        ArrivalBatch {
            per_lookahead,
            ..Default::default()
        }
    }

    #[test]
    fn edf_serves_earliest_first() {
        let out = edf_serve(&Backlog::from_counts(vec![1, 3]), 2);
        assert_eq!(out.served_per_deadline, vec![1, 1]);
        assert_eq!(out.leftover_capacity, 0);
        assert_eq!(out.expired, 0);
    }

    #[test]
    fn edf_deficit_and_empty() {
        assert_eq!(edf_serve(&Backlog::from_counts(vec![5, 0]), 3).expired, 2);
        let out = edf_serve(&Backlog::from_counts(vec![0, 0]), 4);
        assert_eq!(out.leftover_capacity, 4);
        assert_eq!(out.expired, 0);
    }

    #[test]
    fn advance_shifts_and_inserts() {
        let b = advance_slot(&Backlog::from_counts(vec![0, 2]), &batch(vec![0, 3])).unwrap();
        assert_eq!(b.counts(), &[2, 3]);
        let b = advance_slot(&Backlog::new(3), &batch(vec![7])).unwrap();
        assert_eq!(b.counts(), &[7, 0, 0, 0]);
        let b = advance_slot(&Backlog::new(3), &batch(vec![])).unwrap();
        assert!(b.is_empty());
    }

    #[test]
    fn advance_rejects_out_of_horizon_arrivals() {
        let err = advance_slot(&Backlog::new(1), &batch(vec![0, 0, 4])).unwrap_err();
        assert!(matches!(
            err,
            SchedError::LookaheadBeyondHorizon { lookahead: 2, .. }
        ));
    }

    #[test]
    fn advance_detects_overflow() {
        let b = Backlog::from_counts(vec![0, u64::MAX]);
        assert_eq!(
            advance_slot(&b, &batch(vec![1])).unwrap_err(),
            SchedError::Overflow
        );
    }

    #[test]
    fn dynamic_capacity_examples() {
        let bp = Backlog::from_counts(vec![3, 4]);
        assert_eq!(dynamic_primary_capacity(&bp, 10, 0.5), 5);
        assert_eq!(dynamic_primary_capacity(&bp, 5, 1.0), 5);
        assert_eq!(dynamic_primary_capacity(&bp, 10, 0.0), 3);
        let odd = Backlog::from_counts(vec![0, 3]);
        assert_eq!(dynamic_primary_capacity(&odd, 10, 0.5), 2);
        assert_eq!(
            dynamic_primary_capacity_with(&odd, 10, 0.5, FractionRounding::Floor),
            1
        );
        // 0.1 * 30 is 3.0000000000000004 in binary floating point
        let thirty = Backlog::from_counts(vec![0, 30]);
        assert_eq!(dynamic_primary_capacity(&thirty, 100, 0.1), 3);
    }

    #[test]
    fn selfish_two_class() {
        let (p, s) = serve_two_class(
            &Backlog::from_counts(vec![2, 1]),
            2,
            4,
            PrimaryMode::SelfishPrimary,
        );
        assert_eq!(p.served(), 3);
        assert_eq!(s.served(), 1);
        assert_eq!(s.expired, 1);
    }

    #[test]
    fn dynamic_two_class_leaves_room() {
        let (p, s) = serve_two_class(
            &Backlog::from_counts(vec![0, 4]),
            2,
            4,
            PrimaryMode::dynamic(0.5),
        );
        assert_eq!(p.served(), 2);
        assert_eq!(s.served(), 2);
        assert!(!s.is_outage());
    }

    #[test]
    fn no_secondary_no_secondary_outage() {
        let (_, s) = serve_two_class(
            &Backlog::from_counts(vec![9, 9]),
            0,
            4,
            PrimaryMode::SelfishPrimary,
        );
        assert!(!s.is_outage());
    }

    #[test]
    fn multicast_edf_examples() {
        // a=0, b=1, c=2
        let mb = MulticastBacklog::from_deadlines(3, 1, &[(0, 0), (1, 0), (2, 1)]);
        let out = multicast_edf_serve(&mb, 2);
        assert_eq!(out.served_sources, vec![0, 1]);
        assert_eq!(out.outcome.expired, 0);
        let next = mb.after_service(&out.served_sources);
        assert_eq!(next.residual_deadline(2), Some(1));
        assert_eq!(next.len(), 1);

        let mb = MulticastBacklog::from_deadlines(3, 1, &[(0, 0), (1, 0), (2, 0)]);
        assert_eq!(multicast_edf_serve(&mb, 2).outcome.expired, 1);

        let out = multicast_edf_serve(&MulticastBacklog::new(4, 2), 5);
        assert_eq!(out.outcome.leftover_capacity, 5);
    }

    #[test]
    fn alignment_serves_later_requests_too() {
        let mb = MulticastBacklog::new(2, 2);
        let first = ArrivalBatch {
            multicast_sources: vec![1],
            ..Default::default()
        };
        let mb = mb.advance(&first, 2).unwrap();
        let mb = mb.after_service(&[]);
        let mb = mb.advance(&first, 2).unwrap();
        assert_eq!(mb.residual_deadline(1), Some(1));
        assert_eq!(mb.len(), 1);
        let served = multicast_edf_serve(&mb, 1);
        let mb = mb.after_service(&served.served_sources);
        assert!(mb.is_empty());
    }

    #[test]
    fn expired_source_keeps_its_later_request() {
        let mb = MulticastBacklog::from_masks(1, vec![0b11]);
        let out = multicast_edf_serve(&mb, 0);
        assert_eq!(out.outcome.expired, 1);
        let next = mb.after_service(&out.served_sources);
        assert_eq!(next.residual_deadline(0), Some(1));
    }

    #[test]
    fn pi2_examples() {
        let mb = MulticastBacklog::from_deadlines(1, 1, &[(0, 0)]);
        let out = pi2_serve(&mb, 3, 3);
        assert_eq!(out.multicast.served_sources, vec![0]);
        assert_eq!(out.unicast.served(), 2);
        assert_eq!(out.unicast.expired, 1);
        assert!(out.is_outage());

        let out = pi2_serve(&MulticastBacklog::new(4, 1), 3, 3);
        assert!(!out.is_outage());

        let mb = MulticastBacklog::from_deadlines(2, 1, &[(0, 0), (1, 0)]);
        let out = pi2_serve(&mb, 0, 1);
        assert_eq!(out.multicast.outcome.expired, 1);
    }

    #[test]
    fn pi2_puts_unicast_ahead_of_future_multicast() {
        let mb = MulticastBacklog::from_deadlines(2, 2, &[(0, 0), (1, 2)]);
        let out = pi2_serve(&mb, 1, 2);
        assert_eq!(out.multicast.served_sources, vec![0]);
        assert_eq!(out.unicast.served(), 1);
        assert_eq!(out.multicast.outcome.leftover_capacity, 0);
    }

    #[test]
    fn mixed_edf_interleaves_by_deadline() {
        let mb = MulticastBacklog::from_deadlines(3, 2, &[(0, 1), (1, 2), (2, 0)]);
        let uni = Backlog::from_counts(vec![1, 1, 5]);
        let out = mixed_edf_serve(&mb, &uni, 4);
        assert_eq!(out.multicast.served_sources, vec![2, 0]);
        assert_eq!(out.unicast.served_per_deadline, vec![1, 1, 0]);
        assert!(!out.is_outage());
        let out = mixed_edf_serve(&mb, &uni, 1);
        assert_eq!(out.unicast.expired, 1);
        assert!(out.is_outage());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        /// Reference EDF over individual requests tagged with absolute deadlines.
        fn reference_expirations(arrivals: &[Vec<u64>], capacity: usize) -> Vec<u64> {
            let mut pending: Vec<u64> = Vec::new();
            arrivals
                .iter()
                .enumerate()
                .map(|(slot, batch)| {
                    let slot = slot as u64;
                    for (k, &q) in batch.iter().enumerate() {
                        pending.extend(std::iter::repeat_n(slot + k as u64, q as usize));
                    }
                    pending.sort_unstable();
                    pending.drain(..capacity.min(pending.len()));
                    let expired = pending.iter().take_while(|&&d| d == slot).count();
                    pending.drain(..expired);
                    expired as u64
                })
                .collect()
        }

        fn run_edf(arrivals: &[Vec<u64>], horizon: u32, capacity: u64) -> Vec<u64> {
            let mut b = Backlog::new(horizon);
            arrivals
                .iter()
                .map(|a| {
                    let cur = advance_slot(&b, &batch(a.clone())).unwrap();
                    let out = edf_serve(&cur, capacity);
                    b = cur.after_service(&out);
                    out.expired
                })
                .collect()
        }

        fn arrivals(horizon: u32) -> impl Strategy<Value = Vec<Vec<u64>>> {
            prop::collection::vec(prop::collection::vec(0u64..4, horizon as usize + 1), 1..40)
        }

        fn backlog() -> impl Strategy<Value = Backlog> {
            prop::collection::vec(0u64..8, 1..6).prop_map(Backlog::from_counts)
        }

        proptest! {
            #[test]
            fn edf_is_work_conserving(b in backlog(), c in 0u64..20) {
                let out = edf_serve(&b, c);
                prop_assert_eq!(out.served(), c.min(b.total()));
                prop_assert_eq!(out.served() + out.leftover_capacity, c);
            }

            #[test]
            fn edf_matches_request_level_reference(
                (h, arr) in (0u32..4).prop_flat_map(|h| (Just(h), arrivals(h))),
                c in 0u64..6,
            ) {
                prop_assert_eq!(run_edf(&arr, h, c), reference_expirations(&arr, c as usize));
            }

            #[test]
            fn more_capacity_never_hurts(
                (h, arr) in (0u32..4).prop_flat_map(|h| (Just(h), arrivals(h))),
                c in 0u64..6,
            ) {
                let lo: u64 = run_edf(&arr, h, c).iter().sum();
                let hi: u64 = run_edf(&arr, h, c + 1).iter().sum();
                prop_assert!(hi <= lo);
            }

            #[test]
            fn full_fraction_is_selfish(b in backlog(), sec in 0u64..8, c in 0u64..20) {
                prop_assert_eq!(
                    serve_two_class(&b, sec, c, PrimaryMode::dynamic(1.0)),
                    serve_two_class(&b, sec, c, PrimaryMode::SelfishPrimary)
                );
            }

            #[test]
            fn selfish_dominates_dynamic_per_slot(
                b in backlog(), sec in 0u64..8, c in 0u64..20, f in 0.0f64..=1.0,
            ) {
                let (ps, ss) = serve_two_class(&b, sec, c, PrimaryMode::SelfishPrimary);
                let (pd, sd) = serve_two_class(&b, sec, c, PrimaryMode::dynamic(f));
                prop_assert!(ps.expired <= pd.expired);
                prop_assert!(sd.expired <= ss.expired);
                // dynamic never lets a primary request expire that capacity could cover
                prop_assert_eq!(pd.expired, b.urgent().saturating_sub(c));
            }

            #[test]
            fn multicast_edf_is_work_conserving(
                masks in prop::collection::vec(0u64..16, 1..10), c in 0u64..12,
            ) {
                let mb = MulticastBacklog::from_masks(3, masks);
                let out = multicast_edf_serve(&mb, c);
                prop_assert_eq!(out.served_sources.len(), (c as usize).min(mb.len()));
                let after = mb.after_service(&out.served_sources);
                prop_assert!(after.len() <= mb.len());
                prop_assert_eq!(after.urgent(), 0);
            }
        }
    }
}

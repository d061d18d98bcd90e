//! Domain types shared by the pricing, pairing and simulation modules, and
//! the elementary packet arithmetic (value, delay, utility, admissibility).

use alloc::collections::VecDeque;

use crate::error::ModelError;
use crate::money::Money;

/// Delays and positions are measured in router rounds.
pub type Rounds = u32;

/// Identifies a flow within a configuration.
pub type FlowId = usize;

/// Identifies a packet carrier: one window slot of one flow. The carrier is
/// reused by every successor packet that fills the same window slot.
pub type PacketId = usize;

/// `v(d) = max(v_max - c_p * d, 0)` with a deadline beyond which the packet
/// refuses any further delay.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct ValueFunction {
    v_max: Money,
    cost_per_round: Money,
    deadline: Rounds,
}

impl ValueFunction {
    pub fn new(v_max: Money, cost_per_round: Money, deadline: Rounds) -> Result<Self, ModelError> {
        if v_max <= Money::ZERO {
            return Err(ModelError::NonPositiveValue);
        }
        if cost_per_round.is_negative() {
            return Err(ModelError::NegativeCost);
        }
        if let Some(zero_point) = zero_value_delay(v_max, cost_per_round) {
            if deadline > zero_point {
                return Err(ModelError::DeadlinePastZeroValue {
                    deadline,
                    zero_point,
                });
            }
        }
        Ok(ValueFunction {
            v_max,
            cost_per_round,
            deadline,
        })
    }

    /// Deadline at the zero-value point `floor(v_max / c_p)`, or unbounded
    /// for a delay-insensitive packet.
    pub fn with_default_deadline(v_max: Money, cost_per_round: Money) -> Result<Self, ModelError> {
        let deadline = zero_value_delay(v_max, cost_per_round).unwrap_or(Rounds::MAX);
        ValueFunction::new(v_max, cost_per_round, deadline)
    }

    pub fn v_max(&self) -> Money {
        self.v_max
    }

    pub fn cost_per_round(&self) -> Money {
        self.cost_per_round
    }

    pub fn deadline(&self) -> Rounds {
        self.deadline
    }

    pub fn value(&self, delay: Rounds) -> Money {
        packet_value(self, delay)
    }
}

fn zero_value_delay(v_max: Money, cost: Money) -> Option<Rounds> {
    if cost.micros() <= 0 {
        return None;
    }
    let rounds = v_max.micros() / cost.micros();
    Some(rounds.min(Rounds::MAX as i64) as Rounds)
}

/// Position of a packet: a zero-based queue index, or delivered.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Position {
    Queued(Rounds),
    Delivered,
}

impl Position {
    /// Rounds still to wait before delivery, counting from the current round.
    pub fn remaining(&self) -> Rounds {
        match self {
            Position::Queued(p) => *p,
            Position::Delivered => 0,
        }
    }
}

/// Lower and upper bound on a packet's account, in currency units.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct AccountBounds {
    pub min: i64,
    pub max: i64,
}

impl AccountBounds {
    /// Large enough never to bind in practice while leaving headroom for sums.
    pub const UNBOUNDED: AccountBounds = AccountBounds {
        min: -(1 << 60),
        max: 1 << 60,
    };

    pub fn contains(&self, units: i64) -> bool {
        self.min <= units && units <= self.max
    }
}

impl Default for AccountBounds {
    fn default() -> Self {
        AccountBounds::UNBOUNDED
    }
}

/// The tradeable state a packet carries.
///
/// `delay` counts the rounds the packet has spent at the router including the
/// current one, so a packet at position `p` expects a final delay of
/// `delay + p` if it makes no further trades.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Inventory {
    pub account: Money,
    pub delay: Rounds,
    pub position: Position,
    pub rounds_sold: Rounds,
    pub rounds_bought: Rounds,
}

impl Inventory {
    pub fn projected_delay(&self) -> Rounds {
        self.delay + self.position.remaining()
    }

    /// True iff the packet can still be served by its deadline and its
    /// account is inside `bounds` (expressed in micro-units here).
    pub fn is_admissible(&self, vf: &ValueFunction, bounds: &AccountBounds) -> bool {
        self.projected_delay() <= vf.deadline() && bounds.contains(self.account.micros())
    }
}

/// Admissibility with unbounded accounts.
pub fn is_admissible(inv: &Inventory, vf: &ValueFunction) -> bool {
    inv.is_admissible(vf, &AccountBounds::UNBOUNDED)
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub enum FlowKind {
    /// Closed loop: at most `window` packets in flight.
    WindowBased { window: u32 },
    /// Open loop: `rate` packets submitted per round.
    RateBased { rate: f64 },
}

impl FlowKind {
    pub fn is_window_based(&self) -> bool {
        matches!(self, FlowKind::WindowBased { .. })
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum TradeMode {
    AlwaysTrade,
    NeverTrade,
    SellOnly,
    BuyOnly,
}

impl TradeMode {
    pub fn may_sell(self) -> bool {
        matches!(self, TradeMode::AlwaysTrade | TradeMode::SellOnly)
    }

    pub fn may_buy(self) -> bool {
        matches!(self, TradeMode::AlwaysTrade | TradeMode::BuyOnly)
    }
}

/// Which trades a flow's packets accept. With `one_in` set to `c`, each new
/// packet is willing to sell with probability `1/c`.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct TradingPolicy {
    pub mode: TradeMode,
    pub one_in: Option<u32>,
}

impl TradingPolicy {
    pub const fn new(mode: TradeMode) -> Self {
        TradingPolicy { mode, one_in: None }
    }

    pub fn with_one_in(mode: TradeMode, c: u32) -> Result<Self, ModelError> {
        if c == 0 {
            return Err(ModelError::ZeroParticipation);
        }
        Ok(TradingPolicy {
            mode,
            one_in: Some(c),
        })
    }
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct FlowSpec {
    pub id: FlowId,
    pub kind: FlowKind,
    pub value_fn: ValueFunction,
    pub policy: TradingPolicy,
}

/// One in-flight packet. `account` is in currency units of the economy that
/// owns it (micro-money in a money economy, whole fiat units otherwise).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Packet {
    pub id: PacketId,
    pub flow: FlowId,
    /// Increments each time the carrier is refilled by a successor packet.
    pub serial: u64,
    pub account: i64,
    pub delay: Rounds,
    pub entry_position: Rounds,
    pub rounds_sold: Rounds,
    pub rounds_bought: Rounds,
    /// Willing to sell under a one-in-c policy.
    pub seller_eligible: bool,
    pub state: PacketState,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum PacketState {
    Queued,
    /// Failed; the carrier re-enters the queue in the given round.
    Pending { reenter_round: u64 },
}

/// Ordered queue (index 0 is being served) plus the packet carriers it refers to.
#[derive(Clone, Debug)]
pub struct RouterQueueState {
    pub slots: VecDeque<PacketId>,
    pub packets: alloc::vec::Vec<Packet>,
    pub round: u64,
    pub rng_seed: u64,
}

impl RouterQueueState {
    pub fn position_of(&self, id: PacketId) -> Option<usize> {
        self.slots.iter().position(|&p| p == id)
    }

    pub fn packet_at(&self, position: usize) -> Option<&Packet> {
        self.slots.get(position).map(|&id| &self.packets[id])
    }
}

/// One executed bilateral trade.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct TradeRecord {
    pub round: u64,
    pub period: u32,
    pub buyer: PacketId,
    pub seller: PacketId,
    pub buyer_pos_before: Rounds,
    pub seller_pos_before: Rounds,
    /// Price in currency units, paid by the buyer to the seller.
    pub price: i64,
}

impl TradeRecord {
    pub fn distance(&self) -> Rounds {
        self.buyer_pos_before - self.seller_pos_before
    }
}

pub fn packet_value(vf: &ValueFunction, delay: Rounds) -> Money {
    let v = vf.v_max() - vf.cost_per_round() * delay as i64;
    v.max(Money::ZERO)
}

/// `k + 1 + r_s - r_b` for a packet that entered at position `k`.
pub fn packet_delay(start_position: Rounds, rounds_sold: Rounds, rounds_bought: Rounds) -> Result<Rounds, ModelError> {
    let d = start_position as i64 + 1 + rounds_sold as i64 - rounds_bought as i64;
    if d < 1 {
        return Err(ModelError::DelayBelowOne(d));
    }
    Ok(d as Rounds)
}

/// Rate-based flows value a packet at its benefit `v(d) + a`; window-based
/// flows at the benefit rate `(v(d) + a) / d`. `d` is the projected delay.
pub fn utility(inv: &Inventory, vf: &ValueFunction, kind: &FlowKind) -> f64 {
    let d = inv.projected_delay();
    let benefit = (packet_value(vf, d) + inv.account).to_f64();
    match kind {
        FlowKind::RateBased { .. } => benefit,
        FlowKind::WindowBased { .. } => {
            if d == 0 {
                f64::INFINITY
            } else {
                benefit / d as f64
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn vf(v: i64, c: i64) -> ValueFunction {
        ValueFunction::with_default_deadline(Money::from_units(v), Money::from_units(c)).unwrap()
    }

    fn delivered(account: i64, delay: Rounds) -> Inventory {
        Inventory {
            account: Money::from_units(account),
            delay,
            position: Position::Delivered,
            rounds_sold: 0,
            rounds_bought: 0,
        }
    }

    fn queued(delay: Rounds, position: Rounds) -> Inventory {
        Inventory {
            account: Money::ZERO,
            delay,
            position: Position::Queued(position),
            rounds_sold: 0,
            rounds_bought: 0,
        }
    }

    #[test]
    fn value_examples() {
        assert_eq!(packet_value(&vf(500, 1), 100), Money::from_units(400));
        assert_eq!(packet_value(&vf(1000, 4), 100), Money::from_units(600));
        assert_eq!(packet_value(&vf(500, 1), 500), Money::ZERO);
        assert_eq!(packet_value(&vf(500, 1), 700), Money::ZERO);
    }

    #[test]
    fn delay_examples() {
        assert_eq!(packet_delay(99, 0, 0), Ok(100));
        assert_eq!(packet_delay(99, 0, 85), Ok(15));
        assert_eq!(packet_delay(0, 0, 0), Ok(1));
        assert_eq!(packet_delay(3, 0, 4), Err(ModelError::DelayBelowOne(0)));
    }

    #[test]
    fn utility_examples() {
        let w = FlowKind::WindowBased { window: 1 };
        let r = FlowKind::RateBased { rate: 0.01 };
        assert_eq!(utility(&delivered(0, 100), &vf(500, 1), &w), 4.0);
        assert_eq!(utility(&delivered(10, 100), &vf(500, 1), &r), 410.0);
        assert_eq!(utility(&delivered(0, 500), &vf(500, 1), &w), 0.0);
    }

    #[test]
    fn admissibility_examples() {
        let f = ValueFunction::new(Money::from_units(500), Money::from_units(1), 400).unwrap();
        assert!(is_admissible(&queued(10, 5), &f));
        assert!(!is_admissible(&queued(395, 10), &f));
        assert!(is_admissible(&queued(390, 10), &f));
        let tight = AccountBounds { min: -5, max: 5 };
        let mut inv = queued(1, 1);
        inv.account = Money::from_micros(6);
        assert!(!inv.is_admissible(&f, &tight));
    }

    #[test]
    fn value_function_validation() {
        let v = Money::from_units(500);
        let c = Money::from_units(1);
        assert_eq!(ValueFunction::with_default_deadline(v, c).unwrap().deadline(), 500);
        assert!(ValueFunction::new(v, c, 501).is_err());
        assert!(ValueFunction::new(Money::ZERO, c, 1).is_err());
        assert!(ValueFunction::new(v, -c, 1).is_err());
        assert_eq!(
            ValueFunction::with_default_deadline(v, Money::ZERO).unwrap().deadline(),
            Rounds::MAX
        );
        assert!(TradingPolicy::with_one_in(TradeMode::SellOnly, 0).is_err());
    }

    proptest! {
        #[test]
        fn value_non_increasing(v in 1i64..5000, c in 0i64..50, d in 0u32..10_000) {
            let f = vf(v, c);
            prop_assert!(packet_value(&f, d + 1) <= packet_value(&f, d));
            if c > 0 && d as i64 > v / c {
                prop_assert_eq!(packet_value(&f, d), Money::ZERO);
            }
        }

        #[test]
        fn delay_difference_is_net_trading(k in 0u32..1000, rs in 0u32..1000, rb in 0u32..1000) {
            prop_assume!(k as i64 + 1 + rs as i64 - rb as i64 >= 1);
            let with = packet_delay(k, rs, rb).unwrap() as i64;
            let without = packet_delay(k, 0, 0).unwrap() as i64;
            prop_assert_eq!(with - without, rs as i64 - rb as i64);
        }

        #[test]
        fn window_utility_is_rate_utility_over_delay(v in 1i64..5000, c in 0i64..5, d in 1u32..1000) {
            let f = vf(v, c);
            let inv = delivered(0, d);
            let w = utility(&inv, &f, &FlowKind::WindowBased { window: 1 });
            let r = utility(&inv, &f, &FlowKind::RateBased { rate: 1.0 });
            prop_assert!((w - r / d as f64).abs() <= 1e-12 * r.abs().max(1.0));
        }
    }
}

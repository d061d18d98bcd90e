//! Compensatory prices and bilateral negotiation.
//!
//! A packet's compensatory price for moving `d_eps` rounds is the payment that
//! leaves its utility unchanged. Sellers (`d_eps > 0`) ask at least that much;
//! buyers (`d_eps < 0`) offer at most its magnitude. A pair trades only when
//! the rounded ask is strictly below the rounded bid, and settles at the
//! midpoint.

use crate::error::{PricingError, TradeError};
use crate::money::{Money, Price};
use crate::packet::{AccountBounds, FlowKind, Rounds, RouterQueueState, TradeMode, TradeRecord, ValueFunction};

/// `c_p * d_eps`: value lost by a rate-based packet delayed `d_eps` more
/// rounds while inside the linear region of its value function.
pub fn comp_price_rate_based(cost_per_round: Money, d_eps: i64) -> Money {
    cost_per_round * d_eps
}

/// `v(d1) - v(d1 + d_eps)` for an arbitrary value function, including the
/// clamp at zero value. Equals [`comp_price_rate_based`] in the linear region.
pub fn comp_price_value_difference(vf: &ValueFunction, d1: Rounds, d_eps: i64) -> Price {
    let d2 = (d1 as i64 + d_eps).max(0) as Rounds;
    Price::from_money(vf.value(d1) - vf.value(d2))
}

/// `(V + a1) * d_eps / d1`: the payment that keeps a window-based packet's
/// benefit rate `(v(d) + a) / d` unchanged when its delay moves from `d1` to
/// `d1 + d_eps`.
pub fn comp_price_window_based(v_max: Money, account: Money, d1: Rounds, d_eps: i64) -> Result<Price, PricingError> {
    if d1 == 0 {
        return Err(PricingError::ZeroDelay);
    }
    if d1 as i64 + d_eps < 1 {
        return Err(PricingError::ZeroDelay);
    }
    let benefit = (v_max + account).micros() as i128;
    Ok(Price::new(benefit * d_eps as i128, d1 as i128))
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Side {
    Buy,
    Sell,
}

/// What a packet needs to expose to be priced.
#[derive(Copy, Clone, Debug)]
pub struct PacketView {
    pub value_fn: ValueFunction,
    pub kind: FlowKind,
    /// Account balance in currency units.
    pub account_units: i64,
    /// Worth of one currency unit in money.
    pub unit_value: Money,
    pub delay: Rounds,
    pub position: Rounds,
    pub mode: TradeMode,
    pub seller_eligible: bool,
    pub bounds: AccountBounds,
    pub delay_cap: Rounds,
}

impl PacketView {
    pub fn account_value(&self) -> Money {
        Money::from_micros(self.account_units * self.unit_value.micros())
    }

    pub fn projected_delay(&self) -> Rounds {
        self.delay + self.position
    }
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Quote {
    pub compensatory_price: Price,
    pub willing: bool,
    pub side: Side,
    pub d_epsilon: i64,
}

/// Quote for moving `distance` positions back (sell) or forward (buy).
pub fn quote(view: &PacketView, side: Side, distance: Rounds) -> Quote {
    let d1 = view.projected_delay();
    let d_eps = match side {
        Side::Sell => distance as i64,
        Side::Buy => -(distance as i64),
    };
    let new_delay = d1 as i64 + d_eps;

    let mut willing = match side {
        Side::Sell => view.mode.may_sell() && view.seller_eligible,
        Side::Buy => view.mode.may_buy(),
    };
    if side == Side::Sell {
        let deadline = view.value_fn.deadline() as i64;
        // An admissible packet never trades into an inadmissible state.
        if new_delay > deadline && d1 as i64 <= deadline {
            willing = false;
        }
        if new_delay > view.delay_cap as i64 {
            willing = false;
        }
    }

    let price = match view.kind {
        FlowKind::WindowBased { .. } => {
            match comp_price_window_based(view.value_fn.v_max(), view.account_value(), d1, d_eps) {
                Ok(p) => p,
                Err(_) => {
                    willing = false;
                    Price::ZERO
                }
            }
        }
        FlowKind::RateBased { .. } => comp_price_value_difference(&view.value_fn, d1, d_eps),
    };

    Quote {
        compensatory_price: price,
        willing,
        side,
        d_epsilon: d_eps,
    }
}

/// Outcome of a successful negotiation: the price in currency units.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Agreement {
    pub price: i64,
    pub distance: Rounds,
}

/// Negotiates between a buyer behind a seller. Both must be idle (position
/// at least 1). Returns `None` when either side is unwilling, when the
/// rounded ask is not strictly below the rounded bid, or when no price in
/// between respects both account bounds.
pub fn negotiate(buyer: &PacketView, seller: &PacketView) -> Option<Agreement> {
    if buyer.position <= seller.position || seller.position == 0 {
        return None;
    }
    let distance = buyer.position - seller.position;
    let ask = quote(seller, Side::Sell, distance);
    if !ask.willing {
        return None;
    }
    let bid = quote(buyer, Side::Buy, distance);
    if !bid.willing {
        return None;
    }

    let ask_price = ask.compensatory_price;
    let bid_price = bid.compensatory_price.abs();
    if ask_price >= bid_price {
        return None;
    }
    let lo = ask_price.ceil_units(seller.unit_value).max(0);
    let hi = bid_price.floor_units(buyer.unit_value);
    if lo >= hi {
        return None;
    }
    let mid = lo + (hi - lo) / 2;
    let cap = (buyer.account_units - buyer.bounds.min).min(seller.bounds.max - seller.account_units);
    if lo > cap {
        return None;
    }
    Some(Agreement {
        price: mid.min(cap),
        distance,
    })
}

/// Negotiates an unordered pair: whichever packet sits further back is the
/// buyer. Same outcome for `(a, b)` and `(b, a)`.
pub fn negotiate_pair(a: &PacketView, b: &PacketView) -> Option<(Agreement, bool)> {
    if a.position > b.position {
        negotiate(a, b).map(|agreement| (agreement, true))
    } else if b.position > a.position {
        negotiate(b, a).map(|agreement| (agreement, false))
    } else {
        None
    }
}

/// Swaps the two packets' slots and settles the price.
pub fn execute_trade(state: &mut RouterQueueState, trade: &TradeRecord, bounds: &AccountBounds) -> Result<(), TradeError> {
    let bpos = trade.buyer_pos_before as usize;
    let spos = trade.seller_pos_before as usize;
    if bpos <= spos {
        return Err(TradeError::BuyerAhead);
    }
    if state.slots.get(bpos) != Some(&trade.buyer) || state.slots.get(spos) != Some(&trade.seller) {
        return Err(TradeError::StalePositions {
            buyer: trade.buyer_pos_before,
            seller: trade.seller_pos_before,
        });
    }
    let buyer_after = state.packets[trade.buyer].account - trade.price;
    let seller_after = state.packets[trade.seller].account + trade.price;
    if !bounds.contains(buyer_after) || !bounds.contains(seller_after) {
        return Err(TradeError::AccountBound { price: trade.price });
    }
    let delta = trade.distance();
    state.slots.swap(bpos, spos);
    let buyer = &mut state.packets[trade.buyer];
    buyer.account = buyer_after;
    buyer.rounds_bought += delta;
    let seller = &mut state.packets[trade.seller];
    seller.account = seller_after;
    seller.rounds_sold += delta;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::packet::{Packet, PacketState, TradingPolicy};
    use alloc::collections::VecDeque;
    use alloc::vec::Vec;
    use num_rational::Ratio;
    use proptest::prelude::*;

    const MICRO: Money = Money::from_micros(1);

    fn units(n: i64) -> Money {
        Money::from_units(n)
    }

    fn window_view(v: i64, c: i64, deadline: Rounds, account: i64, delay: Rounds, position: Rounds, mode: TradeMode) -> PacketView {
        PacketView {
            value_fn: ValueFunction::new(units(v), units(c), deadline).unwrap(),
            kind: FlowKind::WindowBased { window: 1 },
            account_units: units(account).micros(),
            unit_value: MICRO,
            delay,
            position,
            mode,
            seller_eligible: true,
            bounds: AccountBounds::UNBOUNDED,
            delay_cap: Rounds::MAX,
        }
    }

    #[test]
    fn rate_based_examples() {
        assert_eq!(comp_price_rate_based(units(1), 1), units(1));
        assert_eq!(comp_price_rate_based(units(4), 3), units(12));
        assert_eq!(comp_price_rate_based(Money::ZERO, 5), Money::ZERO);
        let vf = ValueFunction::with_default_deadline(units(40), units(4)).unwrap();
        assert_eq!(comp_price_value_difference(&vf, 2, 3), Price::from_money(units(12)));
        // clamped: value is already zero past the deadline
        assert_eq!(comp_price_value_difference(&vf, 10, 3), Price::ZERO);
        assert_eq!(comp_price_value_difference(&vf, 9, 3), Price::from_money(units(4)));
        assert_eq!(comp_price_value_difference(&vf, 9, -2), Price::from_money(units(-8)));
    }

    #[test]
    fn window_based_examples() {
        let p = comp_price_window_based(units(1000), Money::ZERO, 10, 1).unwrap();
        assert_eq!(p, Price::from_money(units(100)));
        let p = comp_price_window_based(units(500), Money::ZERO, 100, 0).unwrap();
        assert_eq!(p, Price::ZERO);
        let p = comp_price_window_based(units(1000), units(50), 10, -2).unwrap();
        assert_eq!(p, Price::from_money(units(-210)));
        assert_eq!(comp_price_window_based(units(1), Money::ZERO, 0, 1), Err(PricingError::ZeroDelay));
    }

    #[test]
    fn deadline_makes_seller_unwilling() {
        let seller = window_view(500, 1, 400, 0, 390, 5, TradeMode::SellOnly);
        assert!(quote(&seller, Side::Sell, 5).willing);
        assert!(!quote(&seller, Side::Sell, 6).willing);
        let buyer = window_view(1000, 4, 250, 0, 1, 20, TradeMode::BuyOnly);
        let seller = window_view(500, 1, 400, 0, 390, 5, TradeMode::SellOnly);
        assert!(negotiate(&buyer, &seller).is_none());
    }

    #[test]
    fn agreed_price_is_midpoint() {
        // bid = (1000 + 50) * 2 / 10 = 210, ask = 2 * 2 = 4 -> settles at 107
        let buyer = window_view(1000, 4, 250, 50, 1, 9, TradeMode::BuyOnly);
        let seller = PacketView {
            kind: FlowKind::RateBased { rate: 1.0 },
            ..window_view(500, 2, 250, 0, 1, 7, TradeMode::SellOnly)
        };
        assert_eq!(quote(&buyer, Side::Buy, 2).compensatory_price, Price::from_money(units(-210)));
        assert_eq!(quote(&seller, Side::Sell, 2).compensatory_price, Price::from_money(units(4)));
        let a = negotiate(&buyer, &seller).unwrap();
        assert_eq!(a.price, units(107).micros());
        assert_eq!(a.distance, 2);
    }

    #[test]
    fn no_trade_when_ask_exceeds_bid() {
        // bid 3, ask 4
        let seller = PacketView {
            kind: FlowKind::RateBased { rate: 1.0 },
            ..window_view(500, 4, 125, 0, 1, 5, TradeMode::SellOnly)
        };
        let buyer = PacketView {
            kind: FlowKind::RateBased { rate: 1.0 },
            ..window_view(500, 3, 166, 0, 1, 6, TradeMode::BuyOnly)
        };
        assert!(negotiate(&buyer, &seller).is_none());
    }

    #[test]
    fn equal_quotes_do_not_trade() {
        let a = window_view(400, 1, 400, 0, 1, 99, TradeMode::AlwaysTrade);
        let b = window_view(400, 1, 400, 0, 50, 50, TradeMode::AlwaysTrade);
        assert!(negotiate_pair(&a, &b).is_none());
    }

    #[test]
    fn policy_blocks_trades() {
        let buyer = window_view(1000, 4, 250, 0, 1, 50, TradeMode::SellOnly);
        let seller = window_view(500, 1, 400, 0, 1, 10, TradeMode::SellOnly);
        assert!(negotiate(&buyer, &seller).is_none());
        // bid 1000 * 10 / 51 = 196, ask 500 * 10 / 41 = 122
        let buyer = window_view(1000, 4, 250, 0, 1, 50, TradeMode::BuyOnly);
        let mut seller = window_view(500, 1, 400, 0, 1, 40, TradeMode::SellOnly);
        seller.seller_eligible = false;
        assert!(negotiate(&buyer, &seller).is_none());
        seller.seller_eligible = true;
        assert!(negotiate(&buyer, &seller).is_some());
        let never = window_view(500, 1, 400, 0, 1, 40, TradeMode::NeverTrade);
        assert!(negotiate(&buyer, &never).is_none());
    }

    #[test]
    fn account_bounds_cap_price() {
        let mut buyer = window_view(1000, 4, 250, 0, 1, 50, TradeMode::BuyOnly);
        let seller = window_view(500, 1, 400, 0, 1, 10, TradeMode::SellOnly);
        buyer.bounds = AccountBounds { min: 0, max: 1 << 40 };
        assert!(negotiate(&buyer, &seller).is_none());
        // ask is 500*40/11 = 1818.18; give the buyer 2000 of headroom
        buyer.account_units = units(2000).micros();
        let a = negotiate(&buyer, &seller).unwrap();
        assert!(a.price <= units(2000).micros());
        assert!(a.price >= units(1818).micros());
    }

    fn state_with(accounts: &[i64]) -> RouterQueueState {
        let packets: Vec<Packet> = accounts
            .iter()
            .enumerate()
            .map(|(id, &account)| Packet {
                id,
                flow: id,
                serial: 0,
                account,
                delay: 1,
                entry_position: id as Rounds,
                rounds_sold: 0,
                rounds_bought: 0,
                seller_eligible: true,
                state: PacketState::Queued,
            })
            .collect();
        RouterQueueState {
            slots: (0..accounts.len()).collect::<VecDeque<_>>(),
            packets,
            round: 1,
            rng_seed: 0,
        }
    }

    #[test]
    fn execute_swaps_and_settles() {
        let mut s = state_with(&[0; 8]);
        let t = TradeRecord {
            round: 1,
            period: 0,
            buyer: 7,
            seller: 2,
            buyer_pos_before: 7,
            seller_pos_before: 2,
            price: 10,
        };
        execute_trade(&mut s, &t, &AccountBounds::UNBOUNDED).unwrap();
        assert_eq!(s.slots[2], 7);
        assert_eq!(s.slots[7], 2);
        assert_eq!(s.packets[2].account, 10);
        assert_eq!(s.packets[7].account, -10);
        assert_eq!(s.packets[7].rounds_bought, 5);
        assert_eq!(s.packets[2].rounds_sold, 5);
        assert_eq!(s.packets.iter().map(|p| p.account).sum::<i64>(), 0);
        // stale after the swap
        assert!(execute_trade(&mut s, &t, &AccountBounds::UNBOUNDED).is_err());
    }

    #[test]
    fn zero_price_trade_swaps_only() {
        let mut s = state_with(&[3, 4, 5, 6]);
        let t = TradeRecord {
            round: 1,
            period: 0,
            buyer: 3,
            seller: 1,
            buyer_pos_before: 3,
            seller_pos_before: 1,
            price: 0,
        };
        execute_trade(&mut s, &t, &AccountBounds::UNBOUNDED).unwrap();
        assert_eq!(s.slots, VecDeque::from(alloc::vec![0, 3, 2, 1]));
        assert_eq!(s.packets[3].account, 6);
        assert_eq!(s.packets[1].account, 4);
    }

    #[test]
    fn execute_rejects_bound_violation() {
        let mut s = state_with(&[0, 0, 0]);
        let t = TradeRecord {
            round: 1,
            period: 0,
            buyer: 2,
            seller: 1,
            buyer_pos_before: 2,
            seller_pos_before: 1,
            price: 5,
        };
        let bounds = AccountBounds { min: -4, max: 100 };
        assert_eq!(execute_trade(&mut s, &t, &bounds), Err(TradeError::AccountBound { price: 5 }));
        assert_eq!(s.slots, VecDeque::from(alloc::vec![0, 1, 2]));
    }

    type Q = Ratio<i128>;

    fn benefit_rate(v_max: i64, c: i64, account: Q, d: i64) -> Q {
        (Q::from_integer((v_max - c * d) as i128) + account) / Q::from_integer(d as i128)
    }

    proptest! {
        #[test]
        fn compensatory_price_keeps_benefit_rate(
            v in 100i64..5000, c in 0i64..5, a in -50i64..500, d1 in 1i64..80, de in 1i64..20
        ) {
            prop_assume!(v - c * (d1 + de) > 0);
            let rho = comp_price_window_based(units(v), units(a), d1 as Rounds, de).unwrap();
            let rho = Q::new(rho.numer(), rho.denom() * 1_000_000);
            let before = benefit_rate(v, c, Q::from_integer(a as i128), d1);
            let after = benefit_rate(v, c, Q::from_integer(a as i128) + rho, d1 + de);
            prop_assert_eq!(before, after);
        }

        #[test]
        fn trades_are_pareto_improvements(
            bv in 200i64..4000, bc in 1i64..8, ba in -100i64..100, bdelay in 1u32..50, bpos in 2u32..100,
            sv in 200i64..4000, sc in 0i64..4, sa in 0i64..300, sdelay in 1u32..200, spos in 1u32..99,
        ) {
            prop_assume!(spos < bpos);
            let bdl = ((bv / bc) as u32).min(1000);
            prop_assume!(bdelay + bpos <= bdl);
            let sdl = if sc == 0 { 1000 } else { ((sv / sc) as u32).min(1000) };
            prop_assume!(sdelay + spos <= sdl);
            let buyer = window_view(bv, bc, bdl, ba, bdelay, bpos, TradeMode::AlwaysTrade);
            let seller = window_view(sv, sc, sdl, sa, sdelay, spos, TradeMode::AlwaysTrade);
            let forward = negotiate_pair(&buyer, &seller);
            let backward = negotiate_pair(&seller, &buyer);
            prop_assert_eq!(forward.map(|(a, _)| a), backward.map(|(a, _)| a));
            if let Some((agreement, _)) = forward {
                let delta = (bpos - spos) as i64;
                let price = Q::new(agreement.price as i128, 1_000_000);
                let bd = (bdelay + bpos) as i64;
                let sd = (sdelay + spos) as i64;
                let b_before = benefit_rate(bv, bc, Q::from_integer(ba as i128), bd);
                let b_after = benefit_rate(bv, bc, Q::from_integer(ba as i128) - price, bd - delta);
                let s_before = benefit_rate(sv, sc, Q::from_integer(sa as i128), sd);
                let s_after = benefit_rate(sv, sc, Q::from_integer(sa as i128) + price, sd + delta);
                prop_assert!(b_after > b_before);
                prop_assert!(s_after >= s_before);
            }
        }
    }

    #[test]
    fn default_policy_is_unrestricted() {
        let p = TradingPolicy::new(TradeMode::AlwaysTrade);
        assert!(p.mode.may_buy() && p.mode.may_sell() && p.one_in.is_none());
    }
}

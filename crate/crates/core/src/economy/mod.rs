//! The round engine.
//!
//! Each round the packet served in the previous round leaves, every waiting
//! packet moves one position ahead, replacements (and failed packets whose
//! extra delay has elapsed) join at the tail, and then `b` trading periods
//! pair up the idle packets and let them swap positions for money.
//!
//! Without fiat money (the first scenario) accounts hold micro-units of
//! money and a delivered packet's balance is booked to its flow. With fiat
//! money, flows are grouped into teams sharing a deposit, accounts hold whole
//! fiat units, and delivered packets liquidate into the deposit.

mod batch;

pub use batch::{batch_pe_order, batch_pe_wealth};

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::ConfigError;
use crate::money::Money;
use crate::packet::{
    AccountBounds, FlowId, FlowKind, FlowSpec, Packet, PacketId, PacketState, Rounds, RouterQueueState, TradeRecord,
};
use crate::pairing::{shuffle, PairingSource};
use crate::pricing::{execute_trade, negotiate, PacketView};
use crate::report::{FlowReport, SimulationReport};

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum RunLength {
    Rounds(u64),
    /// Stop once this many deliveries have been measured.
    Deliveries(u64),
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub enum PairingMode {
    #[default]
    Direct,
    Pipelined,
}

/// A business flow and an economy flow sharing one deposit.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Team {
    pub business: FlowId,
    pub economy: FlowId,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FiatConfig {
    /// Fiat units in circulation.
    pub total: i64,
    pub deposit_cap: i64,
    /// Worth of one fiat unit when pricing trades.
    pub unit_value: Money,
    pub teams: Vec<Team>,
}

impl FiatConfig {
    /// `(c_e + c_b) / 2`, rounded down to a micro-unit.
    pub fn liquidation_value(c_e: Money, c_b: Money) -> Money {
        Money::from_micros((c_e.micros() + c_b.micros()) / 2)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EconomyConfig {
    pub queue_size: u32,
    pub flows: Vec<FlowSpec>,
    pub trading_periods: u32,
    pub failure_probability: f64,
    pub run_length: RunLength,
    /// Rounds excluded from the statistics.
    pub warmup_rounds: u64,
    pub seed: u64,
    pub stream: u64,
    /// Account limits in currency units (micro-money, or fiat units).
    pub account_bounds: AccountBounds,
    /// No packet sells its way past this delay.
    pub delay_cap: Rounds,
    pub pairing: PairingMode,
    pub fiat: Option<FiatConfig>,
    pub record_series: bool,
}

impl EconomyConfig {
    pub fn new(queue_size: u32, flows: Vec<FlowSpec>, trading_periods: u32, run_length: RunLength, seed: u64) -> Self {
        EconomyConfig {
            queue_size,
            flows,
            trading_periods,
            failure_probability: 0.0,
            run_length,
            warmup_rounds: 0,
            seed,
            stream: 0,
            account_bounds: AccountBounds::UNBOUNDED,
            delay_cap: Rounds::MAX,
            pairing: PairingMode::Direct,
            fiat: None,
            record_series: false,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.queue_size < 2 {
            return Err(ConfigError::QueueTooSmall(self.queue_size));
        }
        if self.trading_periods == 0 {
            return Err(ConfigError::NoTradingPeriods);
        }
        let p = self.failure_probability;
        if !(0.0..=1.0).contains(&p) {
            return Err(ConfigError::FailureProbability(p));
        }
        if self.flows.is_empty() {
            return Err(ConfigError::NoFlows);
        }
        let mut sum = 0u64;
        for (index, flow) in self.flows.iter().enumerate() {
            if flow.id != index {
                return Err(ConfigError::FlowIdOrder { index, found: flow.id });
            }
            match flow.kind {
                FlowKind::WindowBased { window: 0 } => return Err(ConfigError::EmptyWindow(index)),
                FlowKind::WindowBased { window } => sum += window as u64,
                FlowKind::RateBased { .. } => return Err(ConfigError::RateBasedFlow(index)),
            }
        }
        if sum != self.queue_size as u64 {
            return Err(ConfigError::WindowSum {
                sum,
                queue: self.queue_size,
            });
        }
        match self.run_length {
            RunLength::Rounds(0) | RunLength::Deliveries(0) => return Err(ConfigError::EmptyRun),
            _ => {}
        }
        let b = self.account_bounds;
        if b.min > 0 || b.max < 0 {
            return Err(ConfigError::AccountBounds);
        }
        if let Some(fiat) = &self.fiat {
            self.validate_fiat(fiat)?;
        }
        Ok(())
    }

    fn validate_fiat(&self, fiat: &FiatConfig) -> Result<(), ConfigError> {
        if fiat.total < 0 {
            return Err(ConfigError::Fiat("total must be non-negative"));
        }
        if fiat.deposit_cap < 0 {
            return Err(ConfigError::Fiat("deposit cap must be non-negative"));
        }
        if fiat.unit_value <= Money::ZERO {
            return Err(ConfigError::Fiat("unit value must be positive"));
        }
        if fiat.teams.is_empty() {
            return Err(ConfigError::Fiat("at least one team is required"));
        }
        let mut owner = alloc::vec![None; self.flows.len()];
        for (team, t) in fiat.teams.iter().enumerate() {
            for flow in [t.business, t.economy] {
                let Some(slot) = owner.get_mut(flow) else {
                    return Err(ConfigError::Team {
                        team,
                        reason: "refers to an unknown flow",
                    });
                };
                if slot.is_some() {
                    return Err(ConfigError::Team {
                        team,
                        reason: "flow already belongs to a team",
                    });
                }
                *slot = Some(team);
                if self.flows[flow].kind != (FlowKind::WindowBased { window: 1 }) {
                    return Err(ConfigError::Team {
                        team,
                        reason: "team flows must have window 1",
                    });
                }
            }
        }
        if owner.iter().any(Option::is_none) {
            return Err(ConfigError::Fiat("every flow must belong to a team"));
        }
        Ok(())
    }
}

/// With probability `p_f`, an extra delay uniform on `1..=q-1`.
pub fn inject_failure<R: Rng + ?Sized>(rng: &mut R, p_f: f64, q: u32) -> Option<Rounds> {
    if p_f <= 0.0 || q < 2 {
        return None;
    }
    if rng.random::<f64>() < p_f {
        Some(rng.random_range(1..q))
    } else {
        None
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Delivery {
    pub packet: PacketId,
    pub flow: FlowId,
    /// Including any failure delay.
    pub delay: Rounds,
    pub value: Money,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RoundEvents {
    pub delivered: Option<Delivery>,
    pub failure: Option<Rounds>,
    pub trades: u32,
    pub zero_state: bool,
    pub team_failures: u32,
    /// Fiat units handed out from the escrow.
    pub redistributed: i64,
}

struct Fiat {
    config: FiatConfig,
    deposits: Vec<i64>,
    escrow: i64,
    team_of: Vec<usize>,
    is_business: Vec<bool>,
    team_down: Vec<bool>,
}

pub struct Economy {
    config: EconomyConfig,
    state: RouterQueueState,
    rng: ChaCha8Rng,
    unit_value: Money,
    bounds: AccountBounds,
    banks: Vec<i64>,
    fiat: Option<Fiat>,
    carriers_of: Vec<Vec<PacketId>>,
    pending: Vec<PacketId>,
    entering: Vec<PacketId>,
    pairing: PairingSource,
    scratch: Vec<usize>,
    pairs: Vec<(usize, usize)>,
    trade_log: Vec<TradeRecord>,
    flows: Vec<FlowReport>,
    measured_rounds: u64,
    round_value: i128,
    trade_count: u64,
    failures: u64,
    team_failures: u64,
    redistributions: u64,
    zero_states: u64,
    series: Vec<f64>,
}

impl Economy {
    pub fn new(config: EconomyConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(config.stream);
        let q = config.queue_size;

        let mut packets = Vec::with_capacity(q as usize);
        let mut carriers_of = Vec::with_capacity(config.flows.len());
        for flow in &config.flows {
            let FlowKind::WindowBased { window } = flow.kind else {
                unreachable!("validated")
            };
            let mut ids = Vec::new();
            for _ in 0..window {
                let id = packets.len();
                ids.push(id);
                packets.push(Packet {
                    id,
                    flow: flow.id,
                    serial: 0,
                    account: 0,
                    delay: 1,
                    entry_position: q - 1,
                    rounds_sold: 0,
                    rounds_bought: 0,
                    seller_eligible: true,
                    state: PacketState::Queued,
                });
            }
            carriers_of.push(ids);
        }

        // Start as if the queue had always run FIFO: every packet expects a
        // delay of exactly q.
        let mut order: Vec<PacketId> = (0..packets.len()).collect();
        shuffle(&mut rng, &mut order);
        for (pos, &id) in order.iter().enumerate() {
            packets[id].delay = q - pos as Rounds;
        }
        for p in packets.iter_mut() {
            p.seller_eligible = draw_eligibility(&mut rng, &config.flows[p.flow]);
        }

        let (unit_value, mut bounds) = match &config.fiat {
            Some(f) => (f.unit_value, config.account_bounds),
            None => (Money::from_micros(1), config.account_bounds),
        };
        let fiat = config.fiat.as_ref().map(|f| {
            bounds.min = 0;
            let mut team_of = alloc::vec![0; config.flows.len()];
            let mut is_business = alloc::vec![false; config.flows.len()];
            for (t, team) in f.teams.iter().enumerate() {
                team_of[team.business] = t;
                team_of[team.economy] = t;
                is_business[team.business] = true;
            }
            let n = f.teams.len() as i64;
            let mut deposits = Vec::with_capacity(f.teams.len());
            let mut escrow = f.total;
            for t in 0..n {
                let share = (f.total / n + i64::from(t < f.total % n)).min(f.deposit_cap);
                deposits.push(share);
                escrow -= share;
            }
            Fiat {
                config: f.clone(),
                deposits,
                escrow,
                team_of,
                is_business,
                team_down: alloc::vec![false; f.teams.len()],
            }
        });

        let pairing = match config.pairing {
            PairingMode::Direct => PairingSource::Direct,
            PairingMode::Pipelined => PairingSource::pipelined(q as usize - 1),
        };
        let flows = (0..config.flows.len()).map(FlowReport::new).collect();
        let mut economy = Economy {
            state: RouterQueueState {
                slots: order.into_iter().collect(),
                packets,
                round: 0,
                rng_seed: config.seed,
            },
            rng,
            unit_value,
            bounds,
            banks: alloc::vec![0; config.flows.len()],
            fiat,
            carriers_of,
            pending: Vec::new(),
            entering: Vec::new(),
            pairing,
            scratch: Vec::new(),
            pairs: Vec::new(),
            trade_log: Vec::new(),
            flows,
            measured_rounds: 0,
            round_value: 0,
            trade_count: 0,
            failures: 0,
            team_failures: 0,
            redistributions: 0,
            zero_states: 0,
            series: Vec::new(),
            config,
        };
        for id in 0..economy.state.packets.len() {
            economy.withdraw(id);
        }
        Ok(economy)
    }

    pub fn config(&self) -> &EconomyConfig {
        &self.config
    }

    pub fn state(&self) -> &RouterQueueState {
        &self.state
    }

    /// Trades executed in the most recent round.
    pub fn last_trades(&self) -> &[TradeRecord] {
        &self.trade_log
    }

    /// Packet accounts plus the balances booked to flows. Constant without fiat money.
    pub fn money_total(&self) -> i128 {
        let accounts: i128 = self.state.packets.iter().map(|p| p.account as i128).sum();
        accounts + self.banks.iter().map(|&b| b as i128).sum::<i128>()
    }

    /// Fiat units in packets, deposits and the router escrow.
    pub fn fiat_total(&self) -> Option<i64> {
        let fiat = self.fiat.as_ref()?;
        let accounts: i64 = self.state.packets.iter().map(|p| p.account).sum();
        Some(accounts + fiat.deposits.iter().sum::<i64>() + fiat.escrow)
    }

    pub fn deposits(&self) -> Option<&[i64]> {
        self.fiat.as_ref().map(|f| f.deposits.as_slice())
    }

    pub fn run_round(&mut self) -> RoundEvents {
        let mut ev = self.begin_round();
        for period in 0..self.config.trading_periods {
            ev.trades += self.trading_period(period);
        }
        self.end_round(&mut ev);
        ev
    }

    /// Delivery, shift, entries and escrow distribution.
    fn begin_round(&mut self) -> RoundEvents {
        self.state.round += 1;
        self.trade_log.clear();
        self.round_value = 0;
        let round = self.state.round;
        let mut ev = RoundEvents::default();

        if let Some(id) = self.state.slots.pop_front() {
            self.deliver(id, round, &mut ev);
        }
        for &id in &self.state.slots {
            self.state.packets[id].delay += 1;
        }
        self.enter(round, &mut ev);
        self.distribute_escrow(&mut ev);
        ev
    }

    fn end_round(&mut self, ev: &mut RoundEvents) {
        self.detect_team_failures(ev);
        if self.state.round > self.config.warmup_rounds {
            self.measured_rounds += 1;
            if self.config.record_series {
                self.series.push(self.round_value as f64 / crate::money::MICROS_PER_UNIT as f64);
            }
        }
        self.trade_count += ev.trades as u64;
        self.zero_states += ev.zero_state as u64;
    }

    fn deliver(&mut self, id: PacketId, round: u64, ev: &mut RoundEvents) {
        let q = self.config.queue_size;
        let failure = inject_failure(&mut self.rng, self.config.failure_probability, q);
        let packet = &mut self.state.packets[id];
        debug_assert_eq!(
            packet.delay as i64,
            packet.entry_position as i64 + 1 + packet.rounds_sold as i64 - packet.rounds_bought as i64
        );
        let spec = &self.config.flows[packet.flow];
        let delay = packet.delay + failure.unwrap_or(0);
        let value = spec.value_fn.value(delay);
        if round > self.config.warmup_rounds {
            self.flows[packet.flow].record(delay, value, spec.value_fn.deadline());
            self.round_value += value.micros() as i128;
        }
        ev.delivered = Some(Delivery {
            packet: id,
            flow: packet.flow,
            delay,
            value,
        });
        ev.failure = failure;

        let flow = packet.flow;
        let account = core::mem::take(&mut packet.account);
        match &mut self.fiat {
            None => self.banks[flow] += account,
            Some(fiat) => {
                let t = fiat.team_of[flow];
                let room = (fiat.config.deposit_cap - fiat.deposits[t]).max(0);
                let moved = account.min(room);
                fiat.deposits[t] += moved;
                packet.account = account - moved;
            }
        }
        packet.serial += 1;
        packet.rounds_sold = 0;
        packet.rounds_bought = 0;
        match failure {
            Some(d_f) => {
                self.failures += 1;
                packet.state = PacketState::Pending {
                    reenter_round: round + d_f as u64,
                };
                self.pending.push(id);
            }
            None => self.entering.push(id),
        }
    }

    fn enter(&mut self, round: u64, ev: &mut RoundEvents) {
        let packets = &self.state.packets;
        let entering = &mut self.entering;
        self.pending.retain(|&id| match packets[id].state {
            PacketState::Pending { reenter_round } if reenter_round <= round => {
                entering.push(id);
                false
            }
            _ => true,
        });
        if self.entering.is_empty() {
            return;
        }
        if self.state.slots.is_empty() && self.entering.len() == self.state.packets.len() {
            ev.zero_state = true;
        }
        if self.entering.len() > 1 {
            shuffle(&mut self.rng, &mut self.entering);
        }
        let entering = core::mem::take(&mut self.entering);
        for &id in &entering {
            let position = self.state.slots.len() as Rounds;
            let eligible = draw_eligibility(&mut self.rng, &self.config.flows[self.state.packets[id].flow]);
            let p = &mut self.state.packets[id];
            p.delay = 1;
            p.entry_position = position;
            p.seller_eligible = eligible;
            p.state = PacketState::Queued;
            self.state.slots.push_back(id);
            self.withdraw(id);
        }
        self.entering = entering;
        self.entering.clear();
    }

    /// A business packet takes as much fiat from its team's deposit as its
    /// account bound allows.
    fn withdraw(&mut self, id: PacketId) {
        let Some(fiat) = &mut self.fiat else { return };
        let p = &mut self.state.packets[id];
        if !fiat.is_business[p.flow] {
            return;
        }
        let t = fiat.team_of[p.flow];
        let amount = fiat.deposits[t].min((self.bounds.max - p.account).max(0));
        fiat.deposits[t] -= amount;
        p.account += amount;
    }

    /// Hands the escrow out one unit at a time to uniformly chosen queued
    /// packets that can still hold more.
    fn distribute_escrow(&mut self, ev: &mut RoundEvents) {
        let Some(fiat) = &mut self.fiat else { return };
        if fiat.escrow == 0 {
            return;
        }
        let max = self.bounds.max;
        let packets = &mut self.state.packets;
        self.scratch.clear();
        self.scratch.extend(self.state.slots.iter().copied().filter(|&id| packets[id].account < max));
        let mut given = 0;
        while fiat.escrow > 0 && !self.scratch.is_empty() {
            let k = self.rng.random_range(0..self.scratch.len());
            let id = self.scratch[k];
            packets[id].account += 1;
            fiat.escrow -= 1;
            given += 1;
            if packets[id].account >= max {
                self.scratch.swap_remove(k);
            }
        }
        if given > 0 {
            self.redistributions += 1;
            ev.redistributed = given;
        }
    }

    fn detect_team_failures(&mut self, ev: &mut RoundEvents) {
        let Some(fiat) = &mut self.fiat else { return };
        for (t, team) in fiat.config.teams.iter().enumerate() {
            let down = [team.business, team.economy].iter().all(|&flow| {
                self.carriers_of[flow]
                    .iter()
                    .all(|&id| matches!(self.state.packets[id].state, PacketState::Pending { .. }))
            });
            if down && !fiat.team_down[t] {
                fiat.escrow += core::mem::take(&mut fiat.deposits[t]);
                ev.team_failures += 1;
                self.team_failures += 1;
            }
            fiat.team_down[t] = down;
        }
    }

    fn view(&self, id: PacketId, position: usize) -> PacketView {
        let p = &self.state.packets[id];
        let spec = &self.config.flows[p.flow];
        PacketView {
            value_fn: spec.value_fn,
            kind: spec.kind,
            account_units: p.account,
            unit_value: self.unit_value,
            delay: p.delay,
            position: position as Rounds,
            mode: spec.policy.mode,
            seller_eligible: p.seller_eligible,
            bounds: self.bounds,
            delay_cap: self.config.delay_cap,
        }
    }

    /// One pairing over the idle packets; returns the number of trades.
    fn trading_period(&mut self, period: u32) -> u32 {
        let n = self.state.slots.len();
        if n < 3 {
            return 0;
        }
        self.pairing.draw_pairs(&mut self.rng, n - 1, &mut self.scratch, &mut self.pairs);
        let mut trades = 0;
        for k in 0..self.pairs.len() {
            let (i, j) = self.pairs[k];
            let (front, back) = if i < j { (i + 1, j + 1) } else { (j + 1, i + 1) };
            let seller = self.state.slots[front];
            let buyer = self.state.slots[back];
            let (s, b) = (&self.state.packets[seller], &self.state.packets[buyer]);
            if !self.config.flows[b.flow].policy.mode.may_buy()
                || !self.config.flows[s.flow].policy.mode.may_sell()
                || !s.seller_eligible
            {
                continue;
            }
            let Some(agreement) = negotiate(&self.view(buyer, back), &self.view(seller, front)) else {
                continue;
            };
            let record = TradeRecord {
                round: self.state.round,
                period,
                buyer,
                seller,
                buyer_pos_before: back as Rounds,
                seller_pos_before: front as Rounds,
                price: agreement.price,
            };
            execute_trade(&mut self.state, &record, &self.bounds).expect("negotiated trade is executable");
            self.trade_log.push(record);
            trades += 1;
        }
        trades
    }

    pub fn is_finished(&self) -> bool {
        match self.config.run_length {
            RunLength::Rounds(n) => self.state.round >= n,
            RunLength::Deliveries(n) => self.flows.iter().map(|f| f.delivered).sum::<u64>() >= n,
        }
    }

    pub fn run(mut self) -> SimulationReport {
        while !self.is_finished() {
            self.run_round();
        }
        self.report()
    }

    pub fn report(&self) -> SimulationReport {
        let value: i128 = self.flows.iter().map(|f| f.value_sum).sum();
        let wealth_rate = if self.measured_rounds == 0 {
            0.0
        } else {
            value as f64 / crate::money::MICROS_PER_UNIT as f64 / self.measured_rounds as f64
        };
        SimulationReport {
            rounds: self.state.round,
            measured_rounds: self.measured_rounds,
            flows: self.flows.clone(),
            wealth_rate,
            trade_count: self.trade_count,
            failures: self.failures,
            team_failures: self.team_failures,
            redistributions: self.redistributions,
            zero_states: self.zero_states,
            wealth_series: self.series.clone(),
        }
    }
}

fn draw_eligibility<R: Rng + ?Sized>(rng: &mut R, spec: &FlowSpec) -> bool {
    match spec.policy.one_in {
        Some(c) if c > 1 => rng.random_ratio(1, c),
        _ => true,
    }
}

/// Runs the money economy. Rejects configurations that carry fiat settings.
pub fn run_scenario1(config: EconomyConfig) -> Result<SimulationReport, ConfigError> {
    if config.fiat.is_some() {
        return Err(ConfigError::Fiat("not used without teams; call run_scenario2"));
    }
    Ok(Economy::new(config)?.run())
}

/// Runs the fiat-money economy with team deposits.
pub fn run_scenario2(config: EconomyConfig) -> Result<SimulationReport, ConfigError> {
    if config.fiat.is_none() {
        return Err(ConfigError::Fiat("missing fiat configuration"));
    }
    Ok(Economy::new(config)?.run())
}

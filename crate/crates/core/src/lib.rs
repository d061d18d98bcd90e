//! A router-queue economy in which packets trade queue positions for money.
//!
//! The crate is `no_std` (with `alloc`) so the simulator can be embedded;
//! file formats and the command line live in the harness crate.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod analysis;
pub mod economy;
pub mod error;
pub mod money;
pub mod packet;
pub mod pairing;
pub mod pricing;
pub mod report;
pub mod schedulers;

pub use economy::{run_scenario1, run_scenario2, Economy, EconomyConfig, FiatConfig, PairingMode, RunLength, Team};
pub use error::{AnalysisError, ConfigError, ModelError, PricingError, TradeError};
pub use money::{Money, Price, MICROS_PER_UNIT};
pub use packet::{
    packet_delay, packet_value, utility, AccountBounds, FlowId, FlowKind, FlowSpec, Inventory, Packet, PacketId,
    PacketState, Position, Rounds, RouterQueueState, TradeMode, TradeRecord, TradingPolicy, ValueFunction,
};
pub use report::{DelayStats, FlowReport, SimulationReport};

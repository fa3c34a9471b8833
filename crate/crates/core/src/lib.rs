//! Equilibrium pricing for a two-firm market with loyal customers.
//!
//! Each firm has a segment of customers loyal to it; a customer stays unless
//! the rival undercuts by more than a random loyalty premium. Firms can
//! price their own and the rival's segment separately. The crate covers
//!
//! - [`single_stage`]: closed-form equilibria of the one-shot game,
//! - [`myopic`]: market shares when the one-shot equilibrium repeats,
//! - [`markov`]: forward-looking firms with unconstrained prices,
//! - [`qre`]: logit equilibria of the price-grid game, which also handle
//!   binding price constraints.

pub mod batch;
mod error;
pub mod loyalty;
pub mod markov;
pub mod myopic;
pub mod qre;
mod roots;
pub mod single_stage;

pub use batch::Execution;
pub use error::{Error, Result};
pub use loyalty::{LoyaltyFamily, LoyaltyModel, MarketParams, ShockDistribution, Side};
pub use single_stage::{PriceProfile, Region, RegionLabel};

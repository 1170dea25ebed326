//! Numerical library for the broadcast approach (variable-to-fixed coding)
//! over fading channels: optimal layering power distributions, expected
//! rates, multiuser rate regions and resource-allocation algorithms for
//! point-to-point, multiple-access, relay, bottleneck and
//! energy-harvesting settings.

pub mod bottleneck;
pub mod fading;
pub mod harvest;
pub mod mac;
pub mod mixed;
pub mod numerics;
pub mod parallel;
pub mod queue;
pub mod relay;
pub mod siso;
pub mod sr;

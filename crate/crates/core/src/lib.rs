//! Multi-agent meteorological research desk: scripted agent debate, a
//! planner/worker orchestrator with a fault-recovery loop, a toy
//! shallow-water simulator, tensor analysis and SVG rendering.

pub mod analysis;
pub mod minisim;
pub mod viz;
pub mod agent;
pub mod debate;
pub mod orchestrator;
pub mod recovery;

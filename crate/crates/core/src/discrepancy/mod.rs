pub mod audit;
pub mod profile;
pub mod sat;

pub use audit::{density_discrepancy, laczkovich_bound_audit, rect_discrepancy_pair, BoundAudit};
pub use profile::{
    cube_discrepancy, profile, summability_report, DiscrepancyProfile, SummabilityReport, UniformityBudget,
};
pub use sat::SummedArea;

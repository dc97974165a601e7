//! Execution-time estimate and structural complexity measures.

use alloc::collections::BTreeSet;

use thiserror::Error;

use crate::process::CbpmnModel;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum MetricsError {
    #[error("cost `{0}` must be a finite number ≥ 0")]
    InvalidCost(&'static str),
    #[error("halstead counts need n1, n2 ≥ 1 and N1 ≥ n1, N2 ≥ n2")]
    InvalidCounts,
}

/// Per-activity costs in abstract time units.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CostParams {
    pub activities: u64,
    pub activity: f64,
    pub fragment: f64,
    pub context_model: f64,
    pub throw_activity: f64,
    pub catch_context: f64,
}

impl CostParams {
    /// Unit costs for `n` activities.
    pub fn unit(n: u64) -> Self {
        CostParams {
            activities: n,
            activity: 1.0,
            fragment: 1.0,
            context_model: 1.0,
            throw_activity: 1.0,
            catch_context: 1.0,
        }
    }

    fn check(&self) -> Result<(), MetricsError> {
        for (name, v) in [
            ("activity", self.activity),
            ("fragment", self.fragment),
            ("context_model", self.context_model),
            ("throw_activity", self.throw_activity),
            ("catch_context", self.catch_context),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(MetricsError::InvalidCost(name));
            }
        }
        Ok(())
    }
}

/// `n · (t_a + t_p + t_cm + t_th + C_ct)`.
pub fn execution_time(p: &CostParams) -> Result<f64, MetricsError> {
    p.check()?;
    Ok(p.activities as f64
        * (p.activity + p.fragment + p.context_model + p.throw_activity + p.catch_context))
}

/// The declared process the adapted one is compared with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Baseline {
    pub activities: usize,
    pub gateway_branches: usize,
}

impl Baseline {
    pub fn of(model: &CbpmnModel) -> Self {
        Baseline {
            activities: model.chain.len(),
            gateway_branches: model.gateway_branches,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StructuralMetrics {
    /// Activities beyond the baseline; negative after bypasses.
    pub noa_extra: i64,
    /// Extra activities plus extra gateways. Contextual adaptation adds no
    /// gateway, so this equals `noa_extra`.
    pub noac_extra: i64,
    /// `E' − N' + 2` over the contextual events and their control transfers.
    pub mcc_extra: i64,
    /// Split branches of the baseline.
    pub cfc: usize,
}

pub fn contextual_events(model: &CbpmnModel) -> usize {
    model.chain.nodes().filter(|n| n.event.is_some()).count()
}

pub fn structural_metrics(model: &CbpmnModel, base: Baseline) -> StructuralMetrics {
    let noa_extra = model.chain.len() as i64 - base.activities as i64;
    // Every contextual event is one extra construct with one control
    // transfer into its activity.
    let events = contextual_events(model) as i64;
    let (extra_nodes, extra_flows) = (events, events);
    StructuralMetrics {
        noa_extra,
        noac_extra: noa_extra,
        mcc_extra: extra_flows - extra_nodes + 2,
        cfc: base.gateway_branches,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HalsteadCounts {
    pub unique_flow: u64,
    pub unique_data: u64,
    pub total_flow: u64,
    pub total_data: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Halstead {
    pub length: f64,
    pub volume: f64,
    pub difficulty: f64,
}

pub fn halstead(c: &HalsteadCounts) -> Result<Halstead, MetricsError> {
    if c.unique_flow == 0
        || c.unique_data == 0
        || c.total_flow < c.unique_flow
        || c.total_data < c.unique_data
    {
        return Err(MetricsError::InvalidCounts);
    }
    let (n1, n2) = (c.unique_flow as f64, c.unique_data as f64);
    let (t1, t2) = (c.total_flow as f64, c.total_data as f64);
    Ok(Halstead {
        length: n1 * libm::log2(n1) + n2 * libm::log2(n2),
        volume: (t1 + t2) * libm::log2(n1 + n2),
        difficulty: (n1 / 2.0) * (t2 / n2),
    })
}

/// Counts for the contextual model. The plain sequence has start, end,
/// task and sequence-flow elements and the activities' output data. Once
/// any contextual event is present it adds one flow construct and one data
/// object kind, and each of the `n` events adds one occurrence of both.
pub fn halstead_counts(model: &CbpmnModel) -> HalsteadCounts {
    let tasks = model.chain.len() as u64;
    let plain_unique_flow = if tasks == 0 { 3 } else { 4 };
    let plain_total_flow = 2 + tasks + (tasks + 1);
    let data: BTreeSet<&str> = model
        .chain
        .nodes()
        .flat_map(|n| n.output_data.iter().map(|d| d.as_str()))
        .collect();
    let plain_total_data: u64 = model
        .chain
        .nodes()
        .map(|n| n.output_data.len() as u64)
        .sum();
    let events = contextual_events(model) as u64;
    let event_kind = u64::from(events > 0);
    HalsteadCounts {
        unique_flow: plain_unique_flow + event_kind,
        unique_data: data.len() as u64 + event_kind,
        total_flow: events + plain_total_flow,
        total_data: events + plain_total_data,
    }
}

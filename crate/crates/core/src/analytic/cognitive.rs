//! Secondary-user gains when a secondary class borrows unused primary capacity.

use serde::{Deserialize, Serialize};

use super::unicast::poisson_rate;
use super::{
    check_unit, positive_root, AnalyticError, BoundValue, DerivedConstants, RootConstant,
    RootDefinition,
};
use crate::traffic::ScalingKind;

fn check_pair(primary: f64, secondary: f64, kind: ScalingKind) -> Result<(), AnalyticError> {
    check_unit("primary gamma", primary)?;
    check_unit("secondary gamma", secondary)?;
    if secondary >= primary {
        return Err(AnalyticError::InvalidParameter(format!(
            "secondary gamma {secondary} must be below primary gamma {primary}"
        )));
    }
    if kind == ScalingKind::Linear && primary + secondary >= 1.0 {
        return Err(AnalyticError::InvalidParameter(format!(
            "combined load {} must stay below 1",
            primary + secondary
        )));
    }
    Ok(())
}

/// Secondary gain with a reactive primary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondaryBounds {
    pub lower: BoundValue,
    pub upper: BoundValue,
}

/// Secondary gain when the primary network does not use prediction. Exact
/// (reported as both bounds) in the polynomial regime.
pub fn div_secondary_nonpred(
    primary: f64,
    secondary: f64,
    kind: ScalingKind,
) -> Result<SecondaryBounds, AnalyticError> {
    check_pair(primary, secondary, kind)?;
    Ok(match kind {
        ScalingKind::Linear => SecondaryBounds {
            lower: BoundValue::lower(poisson_rate(primary + secondary)),
            upper: BoundValue::upper(poisson_rate(primary)),
        },
        ScalingKind::Polynomial => {
            let exact = BoundValue::exact(1.0 - primary);
            SecondaryBounds {
                lower: exact,
                upper: exact,
            }
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicSecondaryGain {
    pub bound: BoundValue,
    pub constants: DerivedConstants,
}

/// Lower bound on the secondary gain when the primary runs dynamic capacity
/// with `f = 1/2` and a one-slot look-ahead, at stationarity.
pub fn div_secondary_dynamic(
    primary: f64,
    secondary: f64,
    kind: ScalingKind,
) -> Result<DynamicSecondaryGain, AnalyticError> {
    check_pair(primary, secondary, kind)?;
    match kind {
        ScalingKind::Linear => {
            // y = e^{r/2} at the optimal tilt; root of secondary*y^2 + primary*y - 1
            let y = positive_root(secondary, primary, -1.0);
            let value = -secondary * (y * y - 1.0) - 2.0 * primary * (y - 1.0) + 2.0 * y.ln();
            Ok(DynamicSecondaryGain {
                bound: BoundValue::lower(value),
                constants: DerivedConstants {
                    y_bar: Some(RootConstant {
                        value: y,
                        definition: RootDefinition::DynamicSecondary { primary, secondary },
                    }),
                    ..Default::default()
                },
            })
        }
        ScalingKind::Polynomial => {
            let value = if 1.0 + secondary >= 2.0 * primary {
                1.0 - primary
            } else {
                (1.0 - secondary) / 2.0
            };
            Ok(DynamicSecondaryGain {
                bound: BoundValue::lower(value),
                constants: DerivedConstants::default(),
            })
        }
    }
}

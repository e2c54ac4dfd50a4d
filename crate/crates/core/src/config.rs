use crate::differentiation::CollocationOperator;
use crate::error::Result;
use crate::lgl_grid::LglGrid;
use crate::mapping::MappingSpec;

pub const DEFAULT_ORDER: usize = 200;
pub const DEFAULT_R_MAX: f64 = 150.0;
/// Box used for diffuse high-lying states.
pub const HIGH_R_MAX: f64 = 300.0;
pub const DEFAULT_SCALE: f64 = 25.0;

/// How the second mapping parameter is fixed once `r_max` is known.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MapParam {
    /// Fix the scale `L`; `α = 2L / r_max`.
    Scale(f64),
    /// Fix the shape `α`; `L = α r_max / 2`.
    Alpha(f64),
}

/// Discretization settings shared by every solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub order: usize,
    pub r_max: f64,
    pub map: MapParam,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            order: DEFAULT_ORDER,
            r_max: DEFAULT_R_MAX,
            map: MapParam::Scale(DEFAULT_SCALE),
        }
    }
}

impl SolverConfig {
    /// Defaults with the enlarged box.
    pub fn high() -> Self {
        Self {
            r_max: HIGH_R_MAX,
            ..Self::default()
        }
    }

    pub fn with_order(self, order: usize) -> Self {
        Self { order, ..self }
    }

    pub fn with_r_max(self, r_max: f64) -> Self {
        Self { r_max, ..self }
    }

    pub fn mapping(&self) -> Result<MappingSpec> {
        match self.map {
            MapParam::Scale(l) => MappingSpec::with_scale(l, self.r_max),
            MapParam::Alpha(a) => MappingSpec::new(a, self.r_max),
        }
    }

    pub fn operator(&self) -> Result<CollocationOperator> {
        CollocationOperator::new(LglGrid::new(self.order)?, self.mapping()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = SolverConfig::default();
        assert_eq!(c.order, 200);
        assert_eq!(c.r_max, 150.0);
        let m = c.mapping().unwrap();
        assert_eq!(m.scale(), 25.0);
        assert!((m.alpha() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(SolverConfig::high().r_max, 300.0);

        let c = SolverConfig {
            map: MapParam::Alpha(25.0),
            ..c
        };
        assert_eq!(c.mapping().unwrap().scale(), 1875.0);
    }
}

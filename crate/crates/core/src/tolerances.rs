/// Named numerical tolerances. Defaults match the documented contracts;
/// callers (the CLI config file in particular) may override any of them.
#[derive(Clone, Debug, PartialEq)]
pub struct Tolerances {
    /// Absolute band on `fiber_rhs` separating Ellipse / Point / Empty.
    pub fiber_point: f64,
    /// Residual threshold for membership in the bifurcation locus.
    pub bifurcation: f64,
    /// Relative singular-value cutoff for numerical rank.
    pub rank_relative: f64,
    /// Width below which an interval with several sign variations is a
    /// multiple root.
    pub root_cluster_width: f64,
    /// Width to which isolated simple roots are refined.
    pub root_refine_width: f64,
    /// Absolute slack on `|H - h|` for sampled level-set points.
    pub level_set: f64,
    /// Bound on `|L_X omega - omega|` accepted by the contact check.
    pub lie_derivative: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            fiber_point: 1e-9,
            bifurcation: 1e-6,
            rank_relative: 1e-9,
            root_cluster_width: 1e-8,
            root_refine_width: 1e-12,
            level_set: 1e-9,
            lie_derivative: 1e-6,
        }
    }
}

impl Tolerances {
    pub const NAMES: [&'static str; 7] = [
        "fiber_point",
        "bifurcation",
        "rank_relative",
        "root_cluster_width",
        "root_refine_width",
        "level_set",
        "lie_derivative",
    ];

    /// Sets a tolerance by name. Returns `false` for unknown names or
    /// non-positive values.
    pub fn set(&mut self, name: &str, value: f64) -> bool {
        if !(value.is_finite() && value > 0.0) {
            return false;
        }
        let slot = match name {
            "fiber_point" => &mut self.fiber_point,
            "bifurcation" => &mut self.bifurcation,
            "rank_relative" => &mut self.rank_relative,
            "root_cluster_width" => &mut self.root_cluster_width,
            "root_refine_width" => &mut self.root_refine_width,
            "level_set" => &mut self.level_set,
            "lie_derivative" => &mut self.lie_derivative,
            _ => return false,
        };
        *slot = value;
        true
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        Some(match name {
            "fiber_point" => self.fiber_point,
            "bifurcation" => self.bifurcation,
            "rank_relative" => self.rank_relative,
            "root_cluster_width" => self.root_cluster_width,
            "root_refine_width" => self.root_refine_width,
            "level_set" => self.level_set,
            "lie_derivative" => self.lie_derivative,
            _ => return None,
        })
    }
}

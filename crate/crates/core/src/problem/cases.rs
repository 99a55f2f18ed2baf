use serde::{Deserialize, Serialize};

use super::{build_problem, motion_for_problem, MotionSpec, PrescribedMotion, ProblemSpec};
use crate::error::Result;
use crate::mesh::QuadMesh;

/// The four default benchmark cases.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestCase {
    Beam,
    FoilTranslation,
    FoilRotation,
    FoilBending,
}

pub const BEAM_TIP: f64 = 0.07;
pub const FOIL_DROP: f64 = 0.1;
/// Clockwise, so negative in the counterclockwise-positive convention.
pub const FOIL_ANGLE_DEG: f64 = -15.0;
pub const FOIL_BEND: f64 = 0.08;

impl TestCase {
    pub const ALL: [TestCase; 4] = [
        TestCase::Beam,
        TestCase::FoilTranslation,
        TestCase::FoilRotation,
        TestCase::FoilBending,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TestCase::Beam => "beam",
            TestCase::FoilTranslation => "foil_translation",
            TestCase::FoilRotation => "foil_rotation",
            TestCase::FoilBending => "foil_bending",
        }
    }

    pub fn problem(self) -> ProblemSpec {
        match self {
            TestCase::Beam => ProblemSpec::beam(),
            _ => ProblemSpec::foil(),
        }
    }

    pub fn motion(self) -> MotionSpec {
        match self {
            TestCase::Beam => MotionSpec::Cantilever { tip: BEAM_TIP },
            TestCase::FoilTranslation => MotionSpec::Translation {
                dx: 0.0,
                dy: -FOIL_DROP,
            },
            TestCase::FoilRotation => MotionSpec::Rotation {
                angle_deg: FOIL_ANGLE_DEG,
                center: None,
            },
            TestCase::FoilBending => MotionSpec::Bending {
                amplitude: FOIL_BEND,
            },
        }
    }

    /// Reference mesh and interface motion.
    pub fn build(self) -> Result<(QuadMesh, PrescribedMotion)> {
        let spec = self.problem();
        let mesh = build_problem(&spec)?;
        let motion = motion_for_problem(&spec, &mesh, &self.motion())?;
        Ok((mesh, motion))
    }
}

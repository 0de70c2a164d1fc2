"""bcfusion: uncertainty-weighted fusion of learned policies and control priors."""

from .fusion import (
    ActionDistribution,
    ActionVector,
    FusionStepRecord,
    GaussianSpec,
    bcf_step,
    fuse,
    mode_action,
    sample_action,
)
from .ensemble import (
    MlpPolicy,
    PolicyEnsemble,
    SurrogatePolicy,
    build_surrogate_ensemble,
    ensemble_predict,
    load_ensemble,
    save_ensemble,
)
from .priors import (
    ApfController,
    ApfParams,
    ControlPriorWrapper,
    RrmcController,
    RrmcParams,
    SensorNoiseModel,
    mc_prior_distribution,
)
from .kinematics import (
    ArmModel,
    JointState,
    damped_pseudoinverse,
    forward_kinematics,
    jacobian,
    manipulability,
    panda_model,
)
from .envs import NavWorld, ReacherWorld, load_arena

__version__ = "0.1.0"

from .nav import (
    Arena,
    NavWorld,
    BUNDLED_ARENAS,
    OOD_ARENAS,
    TRAINING_ARENAS,
    bin_angles,
    load_arena,
)
from .reacher import ReacherWorld

__all__ = [
    "Arena",
    "NavWorld",
    "ReacherWorld",
    "BUNDLED_ARENAS",
    "TRAINING_ARENAS",
    "OOD_ARENAS",
    "bin_angles",
    "load_arena",
]

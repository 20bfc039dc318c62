"""Quality metrics and the experience-driven performance model."""

from .experience import (ExperienceLogError, ExperienceRecord,
                         append_experience, read_log, records_for)
from .metrics import (ImageQuality, acoustic_position_inaccuracy,
                      acoustic_quality_margin, human_reply_probability,
                      image_quality, visual_position_inaccuracy)
from .som import (Prediction, SomConfig, SomMap, parse_som, predict,
                  serialize_som, train_som)

__all__ = [
    "ExperienceLogError", "ExperienceRecord", "ImageQuality", "Prediction",
    "SomConfig", "SomMap", "acoustic_position_inaccuracy",
    "acoustic_quality_margin", "append_experience", "human_reply_probability",
    "image_quality", "parse_som", "predict", "read_log", "records_for",
    "serialize_som", "train_som", "visual_position_inaccuracy",
]

"""
SPC 模块: 对应关系提升、前后划分、损失与解析梯度
"""

from .correspondence import (
    AnchorPointMap,
    Correspondence2D2D,
    CorrespondenceSet,
    Track,
    TrackSet,
    lift_correspondences,
)
from .loss import (
    SpcBreakdown,
    SpcConfig,
    SpcEvaluation,
    evaluate_spc,
    partition_front_back,
    spc_gradient,
    spc_loss,
)

__all__ = [
    'AnchorPointMap', 'Correspondence2D2D', 'CorrespondenceSet', 'Track', 'TrackSet',
    'lift_correspondences', 'SpcBreakdown', 'SpcConfig', 'SpcEvaluation',
    'evaluate_spc', 'partition_front_back', 'spc_gradient', 'spc_loss',
]

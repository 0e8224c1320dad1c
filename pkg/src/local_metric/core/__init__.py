from . import geometry_mgr
from . import metric_mgr
from . import distance_mgr
from . import classifier_mgr
from . import trainer_mgr
from . import dataset_mgr

__all__ = ['geometry_mgr', 'metric_mgr', 'distance_mgr', 'classifier_mgr', 'trainer_mgr', 'dataset_mgr']

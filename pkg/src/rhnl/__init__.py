"""Random heterogeneous neurochaos learning.

Chaotic 1-D neurons (skew-tent and logistic maps) turn each normalized input
feature into four ChaosFEX features (firing time, firing rate, energy and
symbolic entropy), which feed a cosine-similarity, kNN or Gaussian naive Bayes
classifier.
"""

from .chaos import ChaoticMap, Hyperparams, MapKind, NeuralTrace, generate_trace, iterate, lyapunov, map_step
from .chaosfex import transform
from .classify import (
    fit_cosine,
    fit_gnb,
    fit_knn,
    fit_predict_gnb,
    fit_predict_knn,
    predict_cosine,
    predict_gnb,
    predict_knn,
)
from .dataio import Dataset, holdout_split, load_csv, load_dataset, lowsample_splits, normalize, split
from .exceptions import (
    DimensionError,
    DomainError,
    ParameterError,
    ParseError,
    RHNLError,
    SplitError,
    StratificationError,
    TrainingError,
)
from .layer import NeuronKind, NeuronLayout, Scheme, build_layout, parse_architecture
from .metrics import accuracy, confusion_matrix, macro_f1, metrics_report
from .tune import Grid, TuneResult, default_grid, grid_search, stratified_folds

__version__ = "0.1.0"

"""ASL fingerspelling identification from hand trackpoint coordinates.

The package covers the full pipeline: the 64-column trackpoint dataset
schema and a seeded synthetic stand-in generator, bounding-box
normalization (shift / scale / round under cuboidal or cubical boxes),
three from-scratch classifiers (kNN, random forest, 9-layer network), the
28-configuration x 3-algorithm experiment grid, and model persistence plus
an HTTP prediction service.
"""

from .data import (
    CSV_HEADER,
    LETTERS,
    N_CLASSES,
    N_FEATURES,
    N_POINTS,
    Dataset,
    SchemaError,
    as_frame,
    class_prototype,
    features_to_frame,
    frame_to_features,
    generate_synthetic,
    index_to_label,
    label_to_index,
    parse_csv,
    read_csv_file,
    split_train_test,
    write_csv,
    write_csv_file,
)
from .forest import ForestModel, Tree, rf_fit, rf_predict, rf_predict_batch, rf_sweep
from .grid import (
    ALL_ALGORITHMS,
    AlgorithmKind,
    GridCell,
    RunReport,
    dataset_fingerprint,
    render_table,
    run_grid,
    write_grid_outputs,
)
from .knn import KnnModel, knn_fit, knn_predict, knn_predict_batch, knn_sweep
from .metrics import (
    accuracy_from_confusion,
    confusion_matrix,
    evaluate,
    export_confusion,
    import_confusion,
    per_class_accuracy,
)
from .mlp import (
    DEFAULT_WIDTHS,
    MlpModel,
    TrainConfig,
    TrainingCurves,
    gradient_check,
    mlp_forward,
    mlp_init,
    mlp_loss,
    mlp_predict,
    mlp_predict_batch,
    mlp_train,
)
from .normalize import (
    TARGET_EDGE,
    BoundingBox,
    BoxKind,
    PipelineSpec,
    Step,
    apply_pipeline,
    apply_pipeline_batch,
    compute_bbox,
    enumerate_paper_combinations,
    round3,
    round_coords,
    scale,
    scale_factors,
    shift,
)
from .persist import (
    ModelArtifact,
    ModelFormatError,
    PredictionResponse,
    fingerprint,
    load_model,
    make_artifact,
    predict_batch,
    predict_frame,
    save_model,
)
from .server import PredictionServer, make_server, parse_landmarks, serve

__version__ = "0.1.0"

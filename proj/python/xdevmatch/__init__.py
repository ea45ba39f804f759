# Copyright 2026 The xdevmatch Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Cross-device user matching from browsing logs."""

from ._xdm import (
    Classifier,
    Config,
    Dataset,
    EmbedConfig,
    GbdtParams,
    PipelineConfig,
    SynthConfig,
    XdmError,
    f1_score,
    generate_dataset,
    knn,
    load_config,
    load_dataset,
    merge_inference,
    parse_config,
    roc_auc,
    run_pipeline,
    score_submission,
    symmetric_kl,
    token_at_level,
    train_gbdt,
)

__all__ = [
    "Classifier",
    "Config",
    "Dataset",
    "EmbedConfig",
    "GbdtParams",
    "PipelineConfig",
    "SynthConfig",
    "XdmError",
    "f1_score",
    "generate_dataset",
    "knn",
    "load_config",
    "load_dataset",
    "merge_inference",
    "parse_config",
    "roc_auc",
    "run_pipeline",
    "score_submission",
    "symmetric_kl",
    "token_at_level",
    "train_gbdt",
]

"""Dataset builders: templates, trajectory orchestration, shards and manifest."""
from .templates import (InconsistentEval, Sample, Task, TemplateInvariantViolation, build_dou_pred_sample,
                        build_dou_sample, build_go_action_sample, build_go_analysis_sample, build_go_expl_sample,
                        build_go_next_state_sample)
from .pipeline import (GenConfig, Manifest, ManifestMismatch, generate_dataset, load_config, load_manifest,
                       regenerate_sample)

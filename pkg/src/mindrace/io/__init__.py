from .container import ContainerError, read_blob, read_container, write_blob, write_container
from .edf import EdfError, UnsupportedEdf, read_edf, write_edf
from .epochs import concat_epochsets, epochs_from_events
from .physionet import excluded_subjects, parse_run_filename, physionet_class_map, relabel_physionet
from .synth import (
    BandModulation,
    BlinkSpec,
    ClassSpec,
    SynthConfig,
    band_split_config,
    four_class_config,
    synth_dataset,
    synthesize,
    synthesize_blocks,
    two_class_config,
)

__all__ = [
    "ContainerError", "read_blob", "read_container", "write_blob", "write_container",
    "EdfError", "UnsupportedEdf", "read_edf", "write_edf",
    "concat_epochsets", "epochs_from_events",
    "excluded_subjects", "parse_run_filename", "physionet_class_map", "relabel_physionet",
    "BandModulation", "BlinkSpec", "ClassSpec", "SynthConfig",
    "band_split_config", "four_class_config", "synth_dataset", "synthesize", "synthesize_blocks", "two_class_config",
]

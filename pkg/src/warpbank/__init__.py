"""Oversampled allpass-warped cosine-modulated filter bank toolkit."""

from .allpass import AllpassSection, allpass_phase, warp, warp_inverse
from .files import (
    ConfigError,
    load_config,
    load_design,
    read_wav,
    save_config,
    save_design,
    write_csv,
    write_wav,
)
from .modulation import (
    ChannelFilters,
    PrototypeHalf,
    channel_response_warped,
    cosine_basis,
    modulate,
    modulation_constants,
    prototype_response,
)
from .optimize import (
    BankDesign,
    OptimizerReport,
    design,
    envelope,
    find_extrema,
    flatness,
    gradient,
    hessian,
    initial_prototype,
    inner_loop,
    objective,
    update_weights,
)
from .streaming import (
    AllpassLine,
    SubbandFrame,
    analyze,
    measure_response,
    process_signal,
    synthesize,
)
from .subsampling import (
    ChannelBand,
    band_table,
    select_all,
    select_ratio,
    uniform_edges,
    warped_band,
)
from .transfer import (
    BankConfig,
    TransferTables,
    aliasing_bound,
    aliasing_transfer,
    bifrequency_map,
    distortion_transfer,
    error_function,
    frequency_grid,
    overall_transfer,
    overall_transfer_quadratic,
    to_db,
    transfer_quadratic,
)

__version__ = "0.1.0"

__all__ = [
    "AllpassLine",
    "AllpassSection",
    "BankConfig",
    "BankDesign",
    "ChannelBand",
    "ChannelFilters",
    "ConfigError",
    "OptimizerReport",
    "PrototypeHalf",
    "SubbandFrame",
    "TransferTables",
    "aliasing_bound",
    "aliasing_transfer",
    "allpass_phase",
    "analyze",
    "band_table",
    "bifrequency_map",
    "channel_response_warped",
    "cosine_basis",
    "design",
    "distortion_transfer",
    "envelope",
    "error_function",
    "find_extrema",
    "flatness",
    "frequency_grid",
    "gradient",
    "hessian",
    "initial_prototype",
    "inner_loop",
    "load_config",
    "load_design",
    "measure_response",
    "modulate",
    "modulation_constants",
    "objective",
    "overall_transfer",
    "overall_transfer_quadratic",
    "process_signal",
    "prototype_response",
    "read_wav",
    "save_config",
    "save_design",
    "select_all",
    "select_ratio",
    "synthesize",
    "to_db",
    "transfer_quadratic",
    "uniform_edges",
    "update_weights",
    "warp",
    "warp_inverse",
    "warped_band",
    "write_csv",
    "write_wav",
]

"""Neural construction policy trained with REINFORCE."""
from .decode import BEAM, GREEDY, SAMPLE, beam_search, greedy_costs, rollout
from .gradcheck import gradient_check
from .network import CVRP, TSP, ConfigError, NetConfig, PolicyParams, init_params
from .train import (EMA, NONE, ROLLOUT, CurveRow, TrainConfig, TrainResult, plateau_epoch,
                    read_curve, train_overfit, train_reinforce, write_curve)
from .weights import WeightFileError, load_params, load_sidecar, save_params, transfer_init

__all__ = [
    "BEAM", "CVRP", "ConfigError", "CurveRow", "EMA", "GREEDY", "NONE", "NetConfig",
    "PolicyParams", "ROLLOUT", "SAMPLE", "TSP", "TrainConfig", "TrainResult", "WeightFileError",
    "beam_search", "gradient_check", "greedy_costs", "init_params", "load_params", "load_sidecar",
    "plateau_epoch", "read_curve", "rollout", "save_params", "train_overfit", "train_reinforce",
    "transfer_init", "write_curve",
]

from .instances import (
    Instance,
    naive_sketch,
    random_instance,
    random_partition,
    random_perturbation,
    small_instance,
)
from .pairings import all_pairings

__all__ = [
    "all_pairings",
    "Instance",
    "naive_sketch",
    "random_instance",
    "random_partition",
    "random_perturbation",
    "small_instance",
]

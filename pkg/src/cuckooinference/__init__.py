from src.cuckooinference import bounds, constants, core_model, inference_graph, oracles
from src.cuckooinference.core_model import Instance, Placement, Seed, is_legal, sample_instance
from src.cuckooinference.inference_graph import InferenceGraph, NodeId, build_graph, place_all

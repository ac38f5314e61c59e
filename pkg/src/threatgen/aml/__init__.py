from .flows import (
    IN,
    OUT,
    AmlSample,
    FlowTensor,
    TensorizeError,
    TransactionRecord,
    load_flow_tensors,
    read_transactions_csv,
    save_flow_tensors,
    tensorize,
    write_transactions_csv,
)
from .models import AmlDiscriminator, AmlGenerator, account_throughput, mule_objective
from .rules import RuleConfig, rules_engine, rules_proxy, soft_alerts
from .data import (
    LabeledAmlDataset,
    SynthLegitConfig,
    build_mixed_dataset,
    evaluate_detection,
    retrain_detector,
    sample_alerts,
    samples_to_tensor,
    synth_legit_data,
)
from .training import AmlGeometry, build_aml_bundle, train_aml

__all__ = [
    "IN", "OUT",
    "AmlSample", "FlowTensor", "TensorizeError", "TransactionRecord",
    "load_flow_tensors", "read_transactions_csv", "save_flow_tensors",
    "tensorize", "write_transactions_csv",
    "AmlDiscriminator", "AmlGenerator", "account_throughput", "mule_objective",
    "RuleConfig", "rules_engine", "rules_proxy", "soft_alerts",
    "LabeledAmlDataset", "SynthLegitConfig", "build_mixed_dataset",
    "evaluate_detection", "retrain_detector", "sample_alerts", "samples_to_tensor", "synth_legit_data",
    "AmlGeometry", "build_aml_bundle", "train_aml",
]

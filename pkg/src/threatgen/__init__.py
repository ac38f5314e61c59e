"""threatgen: adversarial generation of malicious activity to harden detection systems.

Subpackages:
  core    -- three-term generator loss, Wasserstein critic training, detection metrics
  theory  -- closed-form 1D Gaussian analysis of the training dynamics
  aml     -- money-laundering use case (flow tensors, rules engine, generator/critic)
  recsys  -- recommender injection-attack use case (collaborative filtering, attacks)
  harness -- configs, hyperparameter random search, reports, CLI
"""

__version__ = "0.1.0"

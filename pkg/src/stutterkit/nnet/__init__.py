from .layers import TDNN, FC, ReLU, BatchNorm, Dropout, StatPool, Sequential, length_mask
from .losses import (
    cross_entropy,
    weighted_cross_entropy,
    cross_entropy_grad,
    joint_loss,
    joint_loss_grad,
    contrastive_loss,
    cosine_similarity,
    softmax,
    log_softmax,
    branch_targets,
)
from .optim import Adam, AdamConfig
from .train import TrainConfig, History, train, iter_batches, pad_batch, predict_items, evaluate_loss
from .checkpoint import save_checkpoint, load_checkpoint

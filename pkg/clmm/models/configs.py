"""
configs.py - This module defines classes that encapsulate the
hyperparameters of every clmm program.
"""

import inspect
import json

from clmm.models.augmentationpolicy import AugmentationPolicy
from clmm.models.errors import ConfigError

class ConfigSection(object):
    """
    This class is the parent class for all configuration sections.
    A section's fields are exactly the keyword arguments of its
    constructor.
    """
    name = "parent_section"

    def __repr__(self):
        return "{}({})".format(type(self).__name__, self.to_dict())


    def __eq__(self, other):
        return type(self) is type(other) and self.to_dict() == other.to_dict()


    @classmethod
    def field_names(cls):
        parameters = inspect.signature(cls.__init__).parameters
        return [name for name in parameters if name != "self"]


    def to_dict(self):
        """
        Return the fields of this section as JSON compatible values.
        """
        dict_ = dict()
        for field_name in self.field_names():
            value = getattr(self, field_name)
            if isinstance(value, tuple):
                value = list(value)
            elif isinstance(value, AugmentationPolicy):
                value = str(value)
            dict_[field_name] = value
        #ENDFOR
        return dict_


    @classmethod
    def from_dict(cls, dict_, path=None):
        """
        Construct a section from a dictionary, rejecting unknown keys.

        Arguments:
        dict_ :: dict - the section values
        path :: str - the key path used in error messages
        """
        path = cls.name if path is None else path
        if not isinstance(dict_, dict):
            raise ConfigError("The configuration section {} must be an object, "
                              "got {}.".format(path, type(dict_).__name__))
        field_names = cls.field_names()
        for key in dict_:
            if key not in field_names:
                raise ConfigError("Unknown configuration key {}.{}."
                                  "".format(path, key))
        #ENDFOR
        try:
            return cls(**dict_)
        except ConfigError:
            raise
        except (TypeError, ValueError) as error:
            raise ConfigError("Invalid value in configuration section {}: {}"
                              "".format(path, error))


def _require(condition, message):
    if not condition:
        raise ConfigError(message)


def _as_pair(value, field_name):
    try:
        lo, hi = value
    except (TypeError, ValueError):
        raise ConfigError("{} must be a pair [lo, hi], got {}."
                          "".format(field_name, value))
    return (float(lo), float(hi))


class EncoderConfig(ConfigSection):
    """
    This class encapsulates the architecture of the per-modality
    CNN - differential attention encoder and its projection heads.

    Fields:
    channels :: tuple(int) - input channels of each modality, bound from
        the dataset manifest
    cnn_channels :: tuple(int) - output channels of each conv block, the
        last entry must equal `feature_dim`
    depth :: int - the number of differential attention blocks
    feature_dim :: int - D, the feature dimension
    head_count :: int - h, the number of attention heads
    kernel_size :: int - conv kernel width
    lambda_init :: float in (0, 1) - initial value of the attention lambda
    modality_names :: tuple(str) - bound from the dataset manifest
    padding :: int - conv zero padding on each side
    projection_dim :: int - D_proj, the contrastive embedding size
    stride :: int - conv stride
    window_lengths :: tuple(int) - T_in of each modality, bound from the
        dataset manifest
    """
    name = "encoder"

    def __init__(self, channels=None, cnn_channels=(64, 128, 256), depth=1,
                 feature_dim=256, head_count=4, kernel_size=5,
                 lambda_init=0.8, modality_names=None, padding=2,
                 projection_dim=128, stride=2, window_lengths=None,):
        super().__init__()
        self.cnn_channels = tuple(int(c) for c in cnn_channels)
        self.depth = int(depth)
        self.feature_dim = int(feature_dim)
        self.head_count = int(head_count)
        self.kernel_size = int(kernel_size)
        self.lambda_init = float(lambda_init)
        self.padding = int(padding)
        self.projection_dim = int(projection_dim)
        self.stride = int(stride)
        _require(len(self.cnn_channels) >= 1 and min(self.cnn_channels) >= 1,
                 "encoder.cnn_channels must be a non-empty list of positive ints.")
        _require(self.cnn_channels[-1] == self.feature_dim,
                 "encoder.cnn_channels must end with feature_dim={}, got {}."
                 "".format(self.feature_dim, list(self.cnn_channels)))
        _require(self.head_count >= 1 and self.feature_dim % self.head_count == 0,
                 "encoder.feature_dim={} must be divisible by head_count={}."
                 "".format(self.feature_dim, self.head_count))
        _require(0 < self.lambda_init < 1,
                 "encoder.lambda_init must lie in (0, 1), got {}."
                 "".format(self.lambda_init))
        _require(self.depth >= 1, "encoder.depth must be >= 1.")
        _require(self.kernel_size >= 1 and self.stride >= 1 and self.padding >= 0,
                 "encoder kernel_size and stride must be >= 1, padding >= 0.")
        _require(self.projection_dim >= 1, "encoder.projection_dim must be >= 1.")
        self.channels = None
        self.modality_names = None
        self.window_lengths = None
        if channels is not None or window_lengths is not None:
            if modality_names is None and channels is not None:
                modality_names = ["m{}".format(j) for j in range(len(channels))]
            self._bind(modality_names, channels, window_lengths)


    def _bind(self, modality_names, channels, window_lengths):
        _require(channels is not None and window_lengths is not None
                 and modality_names is not None,
                 "encoder.channels, window_lengths and modality_names "
                 "must be given together.")
        _require(len(channels) == len(window_lengths) == len(modality_names),
                 "encoder.channels, window_lengths and modality_names "
                 "must have one entry per modality.")
        _require(len(channels) >= 2,
                 "At least 2 modalities are required, got {}.".format(len(channels)))
        self.channels = tuple(int(c) for c in channels)
        self.modality_names = tuple(str(n) for n in modality_names)
        self.window_lengths = tuple(int(t) for t in window_lengths)
        for j in range(len(self.channels)):
            _require(self.channels[j] >= 1,
                     "Modality {} must have at least one channel."
                     "".format(self.modality_names[j]))
            self.sequence_length(j)
        #ENDFOR


    def bind(self, modality_names, channels, window_lengths):
        """
        Return a copy of this configuration bound to the given modalities.
        """
        dict_ = self.to_dict()
        dict_.update(modality_names=list(modality_names),
                     channels=list(channels),
                     window_lengths=list(window_lengths))
        return EncoderConfig(**dict_)


    @property
    def head_dim(self):
        return self.feature_dim // self.head_count


    @property
    def is_bound(self):
        return self.channels is not None


    @property
    def modality_count(self):
        return len(self.channels)


    def sequence_length(self, modality_index):
        """
        Compute S, the number of feature vectors the CNN stack produces
        for the given modality.
        """
        length = self.window_lengths[modality_index]
        for block in range(len(self.cnn_channels)):
            if length + 2 * self.padding < self.kernel_size:
                raise ConfigError("Modality {} is too short for the CNN stack: "
                                  "block {} sees length {} with kernel {} and "
                                  "padding {}.".format(self.modality_names[modality_index],
                                                       block, length, self.kernel_size,
                                                       self.padding))
            length = (length + 2 * self.padding - self.kernel_size) // self.stride + 1
        #ENDFOR
        return length


class FusionConfig(ConfigSection):
    """
    This class encapsulates the stage-1 fusion and contrastive
    loss hyperparameters.

    Fields:
    hard_ratio :: float in [0, 1] - rho, the fraction of positives per anchor
        that are marked hard
    hard_weight :: float in (0, 1] - w_h, the similarity scale of hard pairs
    temperature :: float > 0 - tau
    view_count :: int >= 2 - P, fused views per sample
    weight_range :: tuple(float, float) - the uniform range fusion weights
        are drawn from before row normalization
    """
    name = "fusion"

    def __init__(self, hard_ratio=0.02, hard_weight=0.9, temperature=0.07,
                 view_count=3, weight_range=(0.1, 0.9),):
        super().__init__()
        self.hard_ratio = float(hard_ratio)
        self.hard_weight = float(hard_weight)
        self.temperature = float(temperature)
        self.view_count = int(view_count)
        self.weight_range = _as_pair(weight_range, "fusion.weight_range")
        lo, hi = self.weight_range
        _require(0 < lo < hi < 1,
                 "fusion.weight_range must satisfy 0 < lo < hi < 1, got {}."
                 "".format(list(self.weight_range)))
        _require(self.temperature > 0, "fusion.temperature must be > 0.")
        _require(0 <= self.hard_ratio <= 1, "fusion.hard_ratio must lie in [0, 1].")
        _require(0 < self.hard_weight <= 1, "fusion.hard_weight must lie in (0, 1].")
        _require(self.view_count >= 2,
                 "fusion.view_count must be >= 2 so every view has a positive.")


class AugmentationConfig(ConfigSection):
    """
    This class encapsulates the augmentation hyperparameters.

    Fields:
    crop_fraction :: float in (0, 1] - the kept fraction for random_crop
    method :: AugmentationPolicy - the augmentation to apply
    noise_std :: float - standard deviation for noise injection
    scale_range :: tuple(float, float) - channel_scale factor range
    shift_fraction :: float - maximum relative shift for time_shift
    smoothing_width :: int - moving average width for smoothing
    warp_knots :: int - interior knots of the time warp
    warp_range :: tuple(float, float) - per-segment speed factor range,
        must straddle 1
    """
    name = "augmentation"

    def __init__(self, crop_fraction=0.9, method="time_warp", noise_std=0.05,
                 scale_range=(0.8, 1.2), shift_fraction=0.1, smoothing_width=5,
                 warp_knots=4, warp_range=(0.8, 1.2),):
        super().__init__()
        if isinstance(method, AugmentationPolicy):
            self.method = method
        else:
            self.method = AugmentationPolicy.from_name(str(method))
        self.crop_fraction = float(crop_fraction)
        self.noise_std = float(noise_std)
        self.scale_range = _as_pair(scale_range, "augmentation.scale_range")
        self.shift_fraction = float(shift_fraction)
        self.smoothing_width = int(smoothing_width)
        self.warp_knots = int(warp_knots)
        self.warp_range = _as_pair(warp_range, "augmentation.warp_range")
        lo, hi = self.warp_range
        _require(0 < lo <= 1 <= hi,
                 "augmentation.warp_range must straddle 1, got {}."
                 "".format(list(self.warp_range)))
        _require(0 < self.crop_fraction <= 1,
                 "augmentation.crop_fraction must lie in (0, 1], got {}."
                 "".format(self.crop_fraction))
        _require(self.warp_knots >= 0, "augmentation.warp_knots must be >= 0.")
        _require(self.noise_std >= 0, "augmentation.noise_std must be >= 0.")
        _require(0 <= self.shift_fraction < 1,
                 "augmentation.shift_fraction must lie in [0, 1).")
        _require(self.smoothing_width >= 1, "augmentation.smoothing_width must be >= 1.")
        _require(0 < self.scale_range[0] <= self.scale_range[1],
                 "augmentation.scale_range must satisfy 0 < lo <= hi.")


class PretrainConfig(ConfigSection):
    """
    This class encapsulates the stage-1 optimization hyperparameters.

    Fields:
    batch_size :: int >= 2 - raw samples per batch
    epoch_count :: int
    learning_rate :: float
    log_epoch_step :: int - log every this many epochs, 0 disables
    momentum :: float in [0, 1)
    save_epoch_step :: int - save history every this many epochs,
        0 disables
    """
    name = "pretrain"

    def __init__(self, batch_size=4, epoch_count=20, learning_rate=1e-2,
                 log_epoch_step=1, momentum=0., save_epoch_step=1,):
        super().__init__()
        self.batch_size = int(batch_size)
        self.epoch_count = int(epoch_count)
        self.learning_rate = float(learning_rate)
        self.log_epoch_step = int(log_epoch_step)
        self.momentum = float(momentum)
        self.save_epoch_step = int(save_epoch_step)
        _require(self.batch_size >= 2,
                 "pretrain.batch_size must be >= 2, a batch of {} has no negatives."
                 "".format(self.batch_size))
        _require(self.epoch_count >= 0, "pretrain.epoch_count must be >= 0.")
        _require(self.learning_rate > 0, "pretrain.learning_rate must be > 0.")
        _require(0 <= self.momentum < 1, "pretrain.momentum must lie in [0, 1).")
        _require(self.log_epoch_step >= 0 and self.save_epoch_step >= 0,
                 "pretrain log/save steps must be >= 0.")


class FinetuneConfig(ConfigSection):
    """
    This class encapsulates the stage-2 network and optimization
    hyperparameters.

    Fields:
    alpha0 :: float in [0, 1) - the EMA momentum cap
    batch_size :: int >= 1
    epoch_count :: int
    gru_hidden :: int - hidden size of each GRU direction
    lambda_distill :: float >= 0 - distillation weight
    lambda_mix :: float in [0, 1] - weight of the quality prior in beta
    learning_rate :: float
    log_iteration_step :: int - log every this many steps, 0 disables
    momentum :: float in [0, 1)
    phi_hidden :: int - hidden size of the fusion perceptron
    save_iteration_step :: int - save history every this many steps,
        0 disables
    use_bigru :: bool - include the recurrent branch
    use_collaborative :: bool - train with the EMA primary and distillation;
        when False the primary is a copy of the auxiliary
    use_quality_attention :: bool - when False every modality gets
        weight 1/M
    """
    name = "finetune"

    def __init__(self, alpha0=0.9, batch_size=4, epoch_count=40, gru_hidden=128,
                 lambda_distill=0.1, lambda_mix=0.5, learning_rate=1e-3,
                 log_iteration_step=10, momentum=0.9, phi_hidden=256,
                 save_iteration_step=10, use_bigru=True, use_collaborative=True,
                 use_quality_attention=True,):
        super().__init__()
        self.alpha0 = float(alpha0)
        self.batch_size = int(batch_size)
        self.epoch_count = int(epoch_count)
        self.gru_hidden = int(gru_hidden)
        self.lambda_distill = float(lambda_distill)
        self.lambda_mix = float(lambda_mix)
        self.learning_rate = float(learning_rate)
        self.log_iteration_step = int(log_iteration_step)
        self.momentum = float(momentum)
        self.phi_hidden = int(phi_hidden)
        self.save_iteration_step = int(save_iteration_step)
        self.use_bigru = bool(use_bigru)
        self.use_collaborative = bool(use_collaborative)
        self.use_quality_attention = bool(use_quality_attention)
        _require(0 <= self.alpha0 < 1, "finetune.alpha0 must lie in [0, 1).")
        _require(self.batch_size >= 1, "finetune.batch_size must be >= 1.")
        _require(self.epoch_count >= 0, "finetune.epoch_count must be >= 0.")
        _require(self.lambda_distill >= 0, "finetune.lambda_distill must be >= 0.")
        _require(0 <= self.lambda_mix <= 1,
                 "finetune.lambda_mix must lie in [0, 1], got {}.".format(self.lambda_mix))
        _require(self.learning_rate > 0, "finetune.learning_rate must be > 0.")
        _require(0 <= self.momentum < 1, "finetune.momentum must lie in [0, 1).")
        _require(self.gru_hidden >= 1 and self.phi_hidden >= 1,
                 "finetune.gru_hidden and phi_hidden must be >= 1.")
        _require(self.log_iteration_step >= 0 and self.save_iteration_step >= 0,
                 "finetune log/save steps must be >= 0.")


class SyntheticSpec(ConfigSection):
    """
    This class encapsulates the generator of the synthetic multimodal
    dataset.

    Fields:
    amplitudes :: list(list(float)) - class x latent sinusoid amplitudes,
        defaults to 1 + 0.25 k for latent k
    channels :: tuple(int) - channels per modality
    class_count :: int
    frequencies :: list(list(float)) - class x latent frequencies in cycles
        per window, defaults to 1 + c + class_count * k so that no two
        classes share a frequency
    labeled_fraction :: float - per-class labeled fraction used by `split`
    latent_dim :: int - number of latent sinusoids
    mixing_matrices :: list - channels x latent_dim matrix per modality,
        drawn from the generator when not given
    noise_std :: float >= 0
    sample_rate :: float - nominal rate written to the manifest
    samples_per_class :: int
    test_fraction :: float - per-class test fraction used by `split`
    window_length :: int
    """
    name = "synth"

    def __init__(self, amplitudes=None, channels=(3, 3, 3), class_count=5,
                 frequencies=None, labeled_fraction=0.05, latent_dim=3,
                 mixing_matrices=None, noise_std=0.1, sample_rate=50.,
                 samples_per_class=105, test_fraction=0.2, window_length=128,):
        super().__init__()
        self.channels = tuple(int(c) for c in channels)
        self.class_count = int(class_count)
        self.labeled_fraction = float(labeled_fraction)
        self.latent_dim = int(latent_dim)
        self.noise_std = float(noise_std)
        self.sample_rate = float(sample_rate)
        self.samples_per_class = int(samples_per_class)
        self.test_fraction = float(test_fraction)
        self.window_length = int(window_length)
        _require(self.class_count >= 1 and self.latent_dim >= 1,
                 "synth.class_count and latent_dim must be >= 1.")
        _require(len(self.channels) >= 1 and min(self.channels) >= 1,
                 "synth.channels must list positive channel counts.")
        _require(self.noise_std >= 0, "synth.noise_std must be >= 0.")
        _require(self.samples_per_class >= 1, "synth.samples_per_class must be >= 1.")
        _require(0 < self.labeled_fraction < 1, "synth.labeled_fraction must lie in (0, 1).")
        _require(0 <= self.test_fraction < 1, "synth.test_fraction must lie in [0, 1).")
        if frequencies is None:
            frequencies = [[1. + c + self.class_count * k for k in range(self.latent_dim)]
                           for c in range(self.class_count)]
        if amplitudes is None:
            amplitudes = [[1. + 0.25 * k for k in range(self.latent_dim)]
                          for _ in range(self.class_count)]
        self.frequencies = [[float(f) for f in row] for row in frequencies]
        self.amplitudes = [[float(a) for a in row] for row in amplitudes]
        for table, table_name in ((self.frequencies, "frequencies"),
                                  (self.amplitudes, "amplitudes")):
            _require(len(table) == self.class_count
                     and all(len(row) == self.latent_dim for row in table),
                     "synth.{} must be class_count x latent_dim.".format(table_name))
        #ENDFOR
        if mixing_matrices is not None:
            mixing_matrices = [[[float(v) for v in row] for row in matrix]
                               for matrix in mixing_matrices]
            _require(len(mixing_matrices) == self.modality_count,
                     "synth.mixing_matrices needs one matrix per modality.")
            for j, matrix in enumerate(mixing_matrices):
                _require(len(matrix) == self.channels[j]
                         and all(len(row) == self.latent_dim for row in matrix),
                         "synth.mixing_matrices[{}] must be channels x latent_dim."
                         "".format(j))
            #ENDFOR
        self.mixing_matrices = mixing_matrices


    @property
    def modality_count(self):
        return len(self.channels)


class RunConfig(object):
    """
    This class aggregates every configuration section of a clmm run.

    Fields:
    augmentation :: AugmentationConfig
    encoder :: EncoderConfig
    finetune :: FinetuneConfig
    fusion :: FusionConfig
    modalities :: list(str) - names of the modalities to train on,
        None uses all
    pretrain :: PretrainConfig
    seed :: int
    synth :: SyntheticSpec
    """
    sections = (("augmentation", AugmentationConfig),
                ("encoder", EncoderConfig),
                ("finetune", FinetuneConfig),
                ("fusion", FusionConfig),
                ("pretrain", PretrainConfig),
                ("synth", SyntheticSpec),)
    scalars = ("modalities", "seed",)

    def __init__(self, augmentation=None, encoder=None, finetune=None,
                 fusion=None, modalities=None, pretrain=None, seed=0,
                 synth=None,):
        super().__init__()
        self.augmentation = AugmentationConfig() if augmentation is None else augmentation
        self.encoder = EncoderConfig() if encoder is None else encoder
        self.finetune = FinetuneConfig() if finetune is None else finetune
        self.fusion = FusionConfig() if fusion is None else fusion
        self.pretrain = PretrainConfig() if pretrain is None else pretrain
        self.synth = SyntheticSpec() if synth is None else synth
        if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
            raise ConfigError("seed must be a non-negative integer, got {}.".format(seed))
        self.seed = seed
        if modalities is not None:
            _require(isinstance(modalities, (list, tuple)) and len(modalities) >= 2,
                     "modalities must list at least 2 modality names.")
            modalities = [str(name) for name in modalities]
        self.modalities = modalities


    def __repr__(self):
        return "RunConfig({})".format(self.to_dict())


    def to_dict(self):
        dict_ = {"modalities": self.modalities, "seed": self.seed}
        for key, _ in self.sections:
            dict_[key] = getattr(self, key).to_dict()
        return dict_


    @classmethod
    def from_dict(cls, dict_):
        """
        Build a run configuration from a dictionary. Unknown keys
        at any level raise a ConfigError.
        """
        if not isinstance(dict_, dict):
            raise ConfigError("The configuration must be a JSON object.")
        known = set(cls.scalars) | set(key for key, _ in cls.sections)
        for key in dict_:
            if key not in known:
                raise ConfigError("Unknown configuration key {}.".format(key))
        #ENDFOR
        kwargs = dict()
        for key, section_class in cls.sections:
            if key in dict_:
                kwargs[key] = section_class.from_dict(dict_[key], path=key)
        #ENDFOR
        for key in cls.scalars:
            if key in dict_:
                kwargs[key] = dict_[key]
        #ENDFOR
        return cls(**kwargs)


    @classmethod
    def from_json_file(cls, file_path):
        try:
            with open(file_path, "r") as config_file:
                dict_ = json.load(config_file)
        except json.JSONDecodeError as error:
            raise ConfigError("The configuration file {} is not valid JSON: {}"
                              "".format(file_path, error))
        return cls.from_dict(dict_)

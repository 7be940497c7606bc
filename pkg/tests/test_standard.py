"""
test_standard.py - This module provides unit tests on the clmm.standard module.
"""

import numpy as np
import pytest

def _encoder_config(window_lengths=(16, 16)):
    from clmm.models import EncoderConfig

    return EncoderConfig(channels=(2, 3), cnn_channels=(4, 8), feature_dim=8,
                         head_count=4, kernel_size=3, padding=1, projection_dim=4,
                         stride=2, window_lengths=window_lengths)


def _finetune_config(**kwargs):
    from clmm.models import FinetuneConfig

    settings = dict(gru_hidden=4, phi_hidden=8)
    settings.update(kwargs)
    return FinetuneConfig(**settings)


def _ramp_window(lengths=(33, 17), channels=(2, 3)):
    """
    A window whose every channel is the same linear function of
    normalized time, 2 t + 1.
    """
    from clmm.models import MultimodalWindow

    modalities = [np.tile(2 * np.linspace(0., 1., length) + 1, (channel_count, 1))
                  for length, channel_count in zip(lengths, channels)]
    return MultimodalWindow(modalities, label=0, sample_id="ramp")


def _check_gradients(cost_of, params, names, tolerance=1e-4):
    """
    Compare the autograd gradient of `cost_of(params)` with respect to
    each named parameter against central differences.
    """
    from clmm.standard import backward, finite_diff_gradient, relative_error

    for name in names:
        def cost(value):
            trial = dict(params)
            trial[name] = value
            return cost_of(trial)

        _, grads = backward(cost, 0)(params[name])
        assert(np.shape(grads) == np.shape(params[name]))
        assert(relative_error(grads, finite_diff_gradient(cost, params[name])) < tolerance)
    #ENDFOR


### clmm.standard.utils.autogradutil.py ###

def test_backward():
    from clmm.models import ContractError
    from clmm.standard import backward

    value, grads = backward(lambda x: x ** 2, 0)(3.)
    assert(np.isclose(value, 9.))
    assert(abs(grads - 6.) < 1e-6)

    with pytest.raises(ContractError):
        backward(lambda x: x * 2, 0)(np.ones(3))


def test_finite_diff_gradient():
    from clmm.standard import finite_diff_gradient, relative_error

    x = np.array([1., -2., 0.5])
    gradient = finite_diff_gradient(lambda y: np.sum(y ** 3), x)
    assert(relative_error(gradient, 3 * x ** 2) < 1e-8)


### clmm.standard.functions ###

def test_softmax():
    from clmm.standard import log_softmax, softmax

    assert(np.allclose(softmax(np.array([1000., 1000.])), [0.5, 0.5]))
    x = np.random.default_rng(0).normal(size=(3, 5))
    assert(np.allclose(np.sum(softmax(x, axis=-1), axis=-1), 1.))
    assert(np.allclose(np.exp(log_softmax(x)), softmax(x)))
    assert(np.allclose(softmax(np.array([0., np.log(3.)])), [0.25, 0.75], rtol=0, atol=1e-12))
    # shifting a slice by a constant leaves it unchanged
    assert(np.max(np.abs(softmax(x + 7.5, axis=-1) - softmax(x, axis=-1))) < 1e-12)
    assert(np.max(np.abs(softmax(x - x[:, :1], axis=-1) - softmax(x, axis=-1))) < 1e-12)


def test_matmul():
    from clmm.models import DimensionError
    from clmm.standard import matmul

    b = np.array([[3., 4.], [5., 6.]])
    assert(np.array_equal(matmul(np.eye(2), b), b))
    assert(np.array_equal(matmul(np.array([[1., 2.], [3., 4.]]), np.array([[5.], [6.]])),
                          [[17.], [39.]]))
    anything = np.random.default_rng(0).normal(size=(3, 2))
    assert(np.array_equal(matmul(np.zeros((2, 3)), anything), np.zeros((2, 2))))

    with pytest.raises(DimensionError) as error:
        matmul(np.zeros((2, 3)), np.zeros((2, 2)))
    assert("(2, 3)" in str(error.value) and "(2, 2)" in str(error.value))
    with pytest.raises(DimensionError):
        matmul(np.array(2.), np.zeros((2, 2)))


def test_matmul_gradient():
    import autograd.numpy as anp
    from clmm.standard import backward, finite_diff_gradient, matmul, relative_error

    rng = np.random.default_rng(1)
    a = rng.normal(size=(3, 4))
    b = rng.normal(size=(4, 2))
    readout = rng.normal(size=(3, 2))
    cost_a = lambda x: anp.sum(matmul(x, b) * readout)
    cost_b = lambda x: anp.sum(matmul(a, x) * readout)
    _, grads = backward(cost_a, 0)(a)
    assert(relative_error(grads, finite_diff_gradient(cost_a, a)) < 1e-6)
    _, grads = backward(cost_b, 0)(b)
    assert(relative_error(grads, finite_diff_gradient(cost_b, b)) < 1e-6)


def test_l2_normalize():
    from clmm.models import ContractError
    from clmm.standard import l2_normalize

    x = np.array([[3., 4.], [1., 0.]])
    assert(np.allclose(l2_normalize(x), [[0.6, 0.8], [1., 0.]]))
    with pytest.raises(ContractError):
        l2_normalize(np.zeros((2, 3)))


def test_linear_interpolation_matrix():
    from clmm.standard import linear_interpolation_matrix

    matrix = linear_interpolation_matrix(5, 3)
    assert(np.allclose(np.matmul(matrix, np.arange(5.)), [0., 2., 4.]))
    assert(np.allclose(np.sum(linear_interpolation_matrix(7, 4), axis=1), 1.))
    assert(np.allclose(linear_interpolation_matrix(1, 3), 1.))


def test_conv1d():
    from clmm.models import DimensionError
    from clmm.standard import conv1d

    rng = np.random.default_rng(1)
    x = rng.normal(size=(2, 3, 9))
    kernel = rng.normal(size=(4, 3, 3))
    bias = rng.normal(size=4)
    stride = 2
    padding = 1
    y = conv1d(x, kernel, bias=bias, stride=stride, padding=padding)
    assert(y.shape == (2, 4, 5))

    padded = np.pad(x, ((0, 0), (0, 0), (padding, padding)))
    expected = np.zeros_like(y)
    for b in range(2):
        for o in range(4):
            for t in range(5):
                window = padded[b, :, t * stride:t * stride + 3]
                expected[b, o, t] = np.sum(window * kernel[o]) + bias[o]
            #ENDFOR
        #ENDFOR
    #ENDFOR
    assert(np.allclose(y, expected))

    # unbatched
    assert(np.allclose(conv1d(x[0], kernel, bias=bias, stride=stride, padding=padding),
                       expected[0]))

    with pytest.raises(DimensionError):
        conv1d(x, rng.normal(size=(4, 2, 3)))
    with pytest.raises(DimensionError):
        conv1d(x[..., :2], kernel)


def test_conv1d_gradient():
    from clmm.standard import backward, conv1d, finite_diff_gradient, relative_error

    rng = np.random.default_rng(2)
    x = rng.normal(size=(2, 7))
    kernel = rng.normal(size=(3, 2, 3))
    cost = lambda k: np.sum(conv1d(x, k, stride=2, padding=1) ** 2)
    _, grads = backward(cost, 0)(kernel)
    assert(relative_error(grads, finite_diff_gradient(cost, kernel)) < 1e-6)


### clmm.standard.networks.encoder.py ###

def test_encoder_shapes():
    from clmm.standard import (cnn_forward, embed, encode, encoder_parameter_count,
                               init_encoder_params, init_projection_params,)

    config = _encoder_config()
    rng = np.random.default_rng(0)
    params = init_encoder_params(config, rng)
    params.update(init_projection_params(config, rng))
    assert(encoder_parameter_count(config)
           == sum(np.size(value) for value in params.values()))

    x = rng.normal(size=(2, 2, 16))
    assert(config.sequence_length(0) == 4)
    assert(cnn_forward(x, params, config, 0).shape == (2, 4, 8))
    assert(encode(x, params, config, 0).shape == (2, 4, 8))
    assert(encode(x[0], params, config, 0).shape == (4, 8))

    inputs = [x, rng.normal(size=(2, 3, 16))]
    embeddings = embed(inputs, params, config)
    assert(embeddings.shape == (2, 2, 4))
    assert(np.allclose(np.linalg.norm(embeddings, axis=-1), 1.))


def test_encoder_wrong_channels():
    from clmm.models import ConfigError
    from clmm.standard import cnn_forward, init_encoder_params

    config = _encoder_config()
    params = init_encoder_params(config, np.random.default_rng(0))
    with pytest.raises(ConfigError):
        cnn_forward(np.zeros((1, 3, 16)), params, config, 0)


def test_differential_attention():
    from scipy.special import softmax as scipy_softmax
    from clmm.standard import (attention_heads, attention_maps, diff_attention,
                               differential_attention_map, init_encoder_params,)

    config = _encoder_config()
    params = init_encoder_params(config, np.random.default_rng(3))
    features = np.random.default_rng(4).normal(size=(2, 5, 8))

    # Each row of the differential map sums to 1 - lambda.
    attention = differential_attention_map(features, params, config, 0)
    assert(attention.shape == (2, 4, 5, 5))
    assert(np.allclose(np.sum(attention, axis=-1), 1. - config.lambda_init))

    # With lambda = 0 the map is standard scaled dot product attention
    # on the first query / key half of every head.
    params["encoder/m0/attn0/lambda"] = np.array(0.)
    attention = differential_attention_map(features, params, config, 0)
    head_dim = config.head_dim
    w_q = params["encoder/m0/attn0/w_q"]
    w_k = params["encoder/m0/attn0/w_k"]
    for i in range(config.head_count):
        columns = slice(2 * head_dim * i, 2 * head_dim * i + head_dim)
        q = np.matmul(features, w_q[:, columns])
        k = np.matmul(features, w_k[:, columns])
        logits = np.matmul(q, np.swapaxes(k, -1, -2)) / np.sqrt(head_dim)
        assert(np.allclose(attention[:, i], scipy_softmax(logits, axis=-1)))
    #ENDFOR
    a1, _, _, _ = attention_maps(features, params, config, 0)
    assert(np.allclose(attention, a1))

    # so every head output is plain softmax attention over its values
    heads = attention_heads(features, params, config, 0)
    w_v = params["encoder/m0/attn0/w_v"]
    for i in range(config.head_count):
        columns = slice(2 * head_dim * i, 2 * head_dim * i + head_dim)
        q = np.matmul(features, w_q[:, columns])
        k = np.matmul(features, w_k[:, columns])
        v = np.matmul(features, w_v[:, head_dim * i:head_dim * (i + 1)])
        logits = np.matmul(q, np.swapaxes(k, -1, -2)) / np.sqrt(head_dim)
        expected = np.matmul(scipy_softmax(logits, axis=-1), v)
        assert(np.max(np.abs(heads[:, i] - expected)) < 1e-12)
    #ENDFOR

    # The block output is layer normalized over the feature dimension.
    z = diff_attention(features, params, config, 0)
    assert(z.shape == features.shape)
    assert(np.allclose(np.mean(z, axis=-1), 0., atol=1e-9))


def test_diff_attention_gradient():
    import autograd.numpy as anp
    from clmm.standard import diff_attention, init_encoder_params

    config = _encoder_config()
    prefix = "encoder/m0/attn0/"
    names = [prefix + name for name in ("w_q", "w_k", "w_v", "w_o", "lambda")]
    for seed in range(3):
        rng = np.random.default_rng(40 + seed)
        params = init_encoder_params(config, rng)
        params[prefix + "lambda"] = np.array(rng.uniform(0.1, 0.9))
        features = rng.normal(size=(2, 5, 8))
        readout = rng.normal(size=(2, 5, 8))
        cost_of = lambda trial: anp.sum(diff_attention(features, trial, config, 0) * readout)
        _check_gradients(cost_of, params, names)
    #ENDFOR


def test_encode_project_gradient():
    import autograd.numpy as anp
    from clmm.standard import (encode, init_encoder_params,
                               init_projection_params, project,)

    config = _encoder_config()
    for seed in range(3):
        rng = np.random.default_rng(50 + seed)
        params = init_encoder_params(config, rng)
        params.update(init_projection_params(config, rng))
        names = [name for name in sorted(params)
                 if name.startswith("encoder/m0/") or name.startswith("projection/m0/")]
        x = rng.normal(size=(2, 2, 16))
        readout = rng.normal(size=(2, 4))
        cost_of = lambda trial: anp.sum(project(encode(x, trial, config, 0), trial, config, 0)
                                        * readout)
        _check_gradients(cost_of, params, names)
    #ENDFOR


### clmm.standard.networks.dualbranch.py ###

def test_mix_quality_weights():
    from clmm.models import ConfigError
    from clmm.standard import mix_quality_weights

    beta = mix_quality_weights(np.array([0.8, 0.2]), np.array([0.4, 0.6]), 0.5)
    assert(np.allclose(beta, [0.6, 0.4]))
    with pytest.raises(ConfigError):
        mix_quality_weights(np.array([0.8, 0.2]), np.array([0.4, 0.6]), 1.5)


def test_quality_weights():
    from clmm.standard import init_dual_branch_params, quality_weights

    config = _encoder_config()
    params = init_dual_branch_params(config, _finetune_config(), 3, np.random.default_rng(0))
    z_list = [np.random.default_rng(j).normal(size=(4, 3, 8)) for j in range(2)]
    beta = quality_weights(z_list, params, np.array([0.3, 0.7]), 0.25)
    assert(beta.shape == (4, 2))
    assert(np.allclose(np.sum(beta, axis=1), 1.))
    uniform = quality_weights(z_list, params, np.array([0.3, 0.7]), 0.25,
                              use_quality_attention=False)
    assert(np.allclose(uniform, 0.5))

    # large scores saturate the attention softmax, beta stays a distribution
    saturated = [100. * z for z in z_list]
    for lambda_mix in (0., 0.25, 1.):
        for inputs in (z_list, saturated):
            beta = quality_weights(inputs, params, np.array([0.3, 0.7]), lambda_mix)
            assert(np.allclose(np.sum(beta, axis=1), 1., rtol=0, atol=1e-12))
            assert(np.all(beta >= 0.) and np.all(beta <= 1.))
        #ENDFOR
    #ENDFOR
    beta = quality_weights(z_list, params, np.array([0.3, 0.7]), 1.)
    assert(np.allclose(beta, [0.3, 0.7]))


def test_qom_prior():
    from clmm.standard import qom_prior

    rng = np.random.default_rng(5)
    base = rng.normal(size=(20, 4))
    embeddings = np.stack([base + 0.1 * rng.normal(size=(20, 4)),
                           base + 0.1 * rng.normal(size=(20, 4)),
                           rng.normal(size=(20, 4))], axis=1)
    embeddings = embeddings / np.linalg.norm(embeddings, axis=-1, keepdims=True)
    prior = qom_prior(embeddings)
    assert(np.isclose(np.sum(prior), 1.))
    assert(np.argmin(prior) == 2)

    # degenerate embeddings give the uniform prior
    assert(np.allclose(qom_prior(np.zeros((5, 3, 4))), 1. / 3))


def test_bigru():
    from clmm.models import DimensionError
    from clmm.standard import bigru_forward, init_dual_branch_params

    config = _encoder_config()
    params = init_dual_branch_params(config, _finetune_config(), 3, np.random.default_rng(6))

    # Zero input with zero biases keeps every hidden state at zero.
    h_bi = bigru_forward(np.zeros((5, 8)), params)
    assert(h_bi.shape == (5, 8))
    assert(np.allclose(h_bi, 0.))

    sequence = np.random.default_rng(7).normal(size=(2, 1, 8))
    assert(bigru_forward(sequence, params).shape == (2, 1, 8))

    # With shared weights the backward direction is the forward
    # direction run on the reversed sequence.
    for name in ("w_x", "w_h", "b_x", "b_h"):
        params["dual/gru_bwd/" + name] = params["dual/gru_fwd/" + name]
    #ENDFOR
    sequence = np.random.default_rng(8).normal(size=(6, 8))
    hidden = 4
    forward = bigru_forward(sequence, params)
    reversed_ = bigru_forward(sequence[::-1], params)
    assert(np.allclose(forward[:, hidden:], reversed_[::-1, :hidden]))

    with pytest.raises(DimensionError):
        bigru_forward(np.zeros((2, 0, 8)), params)


def test_dual_branch_forward():
    from clmm.models import ContractError, Dummy
    from clmm.standard import (class_count_of, dual_branch_forward,
                               init_dual_branch_params, phi_input_dim,)

    config = _encoder_config()
    rng = np.random.default_rng(9)
    for use_bigru in (True, False):
        finetune_config = _finetune_config(use_bigru=use_bigru)
        params = init_dual_branch_params(config, finetune_config, 3, rng)
        assert(class_count_of(params) == 3)
        assert(params["dual/phi/w1"].shape[0] == phi_input_dim(config, finetune_config))
        # modalities with different sequence lengths
        z_list = [rng.normal(size=(2, 4, 8)), rng.normal(size=(2, 2, 8))]
        reporter = Dummy()
        logits = dual_branch_forward(z_list, params, np.array([0.5, 0.5]),
                                     finetune_config, reporter=reporter)
        assert(logits.shape == (2, 3))
        assert(reporter.beta.shape == (2, 2))
        unbatched = dual_branch_forward([z[0] for z in z_list], params,
                                        np.array([0.5, 0.5]), finetune_config)
        assert(np.allclose(unbatched, logits[0]))
        with pytest.raises(ContractError):
            dual_branch_forward(z_list[:1], params, np.array([0.5, 0.5]), finetune_config)
    #ENDFOR


def test_classify_gradient():
    from clmm.standard import (classify, cross_entropy, init_dual_branch_params,
                               init_encoder_params,)
    from clmm.standard.networks.dualbranch import GRU_DIRECTIONS

    config = _encoder_config(window_lengths=(16, 8))
    finetune_config = _finetune_config()
    names = ["dual/{}/{}".format(direction, name)
             for direction in GRU_DIRECTIONS for name in ("w_x", "w_h", "b_x", "b_h")]
    names += ["dual/phi/" + name for name in ("w1", "b1", "w2", "b2")]
    beta_qom = np.array([0.4, 0.6])
    for seed in range(3):
        rng = np.random.default_rng(10 + seed)
        params = init_encoder_params(config, rng)
        params.update(init_dual_branch_params(config, finetune_config, 3, rng))
        # move away from the zero bias initialization
        for name in names:
            params[name] = 0.5 * rng.normal(size=np.shape(params[name]))
        #ENDFOR
        inputs = [rng.normal(size=(2, 2, 16)), rng.normal(size=(2, 3, 8))]
        labels = rng.integers(0, 3, size=2)
        cost_of = lambda trial: cross_entropy(classify(inputs, trial, config,
                                                       finetune_config, beta_qom),
                                              labels)
        _check_gradients(cost_of, params, names)
    #ENDFOR


### clmm.standard.costs.contrastive.py ###

def _naive_contrastive_loss(vectors, owner, temperature, hard_mask, hard_weight):
    size = vectors.shape[0]
    loss = 0.
    for s in range(size):
        positives = [p for p in range(size) if p != s and owner[p] == owner[s]]
        denominator = 0.
        for a in range(size):
            if a != s:
                denominator += np.exp(np.dot(vectors[s], vectors[a]) / temperature)
        #ENDFOR
        anchor_loss = 0.
        for p in positives:
            weight = hard_weight if hard_mask[s, p] else 1.
            anchor_loss += (weight * np.dot(vectors[s], vectors[p]) / temperature
                            - np.log(denominator))
        #ENDFOR
        loss -= anchor_loss / len(positives)
    #ENDFOR
    return loss


def test_contrastive_canonical_value():
    from clmm.standard import masked_contrastive_loss

    # V_s = V_p = (1, 0) and one negative (0, 1)
    vectors = np.array([[1., 0.], [1., 0.], [0., 1.]])
    positive_mask = np.zeros((3, 3), dtype=bool)
    positive_mask[0, 1] = positive_mask[1, 0] = True
    anchor_mask = np.array([True, False, False])
    loss = masked_contrastive_loss(vectors, positive_mask, 1., anchor_mask=anchor_mask)
    assert(np.isclose(loss, np.log(1 + np.exp(-1)), rtol=0, atol=1e-12))
    assert(np.isclose(loss, 0.31326, atol=1e-5))

    # A hard weight only scales the numerator.
    hard_mask = positive_mask.copy()
    loss = masked_contrastive_loss(vectors, positive_mask, 1., anchor_mask=anchor_mask,
                                   hard_mask=hard_mask, hard_weight=0.5)
    assert(np.isclose(loss, np.log(1 + np.e) - 0.5, rtol=0, atol=1e-12))


def test_contrastive_loss_oracle():
    from clmm.models import FusionConfig
    from clmm.standard import (contrastive_loss, fuse_batch, sample_fusion_weights,
                               select_hard_positives,)

    rng = np.random.default_rng(11)
    for sample_count, view_count in ((2, 2), (3, 3), (4, 3), (4, 2)):
        for hard_weight in (1., 0.6):
            config = FusionConfig(hard_ratio=0.5, hard_weight=hard_weight,
                                  temperature=0.5, view_count=view_count)
            embeddings = rng.normal(size=(sample_count, 2, 4))
            embeddings = embeddings / np.linalg.norm(embeddings, axis=-1, keepdims=True)
            weights = sample_fusion_weights(2, view_count, config.weight_range, rng)
            views = fuse_batch(embeddings, weights)
            hard_mask = select_hard_positives(views, config.hard_ratio)
            expected = _naive_contrastive_loss(views.views, views.owner, config.temperature,
                                               hard_mask, hard_weight)
            loss = contrastive_loss(views, config)
            assert(np.isclose(loss, expected, rtol=1e-9, atol=1e-9))
        #ENDFOR
    #ENDFOR


def test_contrastive_loss_gradient():
    from clmm.models import FusionConfig
    from clmm.standard import (backward, contrastive_loss, finite_diff_gradient,
                               fuse_batch, relative_error, select_hard_positives,)

    rng = np.random.default_rng(12)
    config = FusionConfig(hard_ratio=0.5, hard_weight=0.7, temperature=0.3, view_count=3)
    embeddings = rng.normal(size=(3, 2, 4))
    weights = np.array([[0.2, 0.8], [0.5, 0.5], [0.7, 0.3]])
    hard_mask = select_hard_positives(fuse_batch(embeddings, weights), config.hard_ratio)
    cost = lambda e: contrastive_loss(fuse_batch(e, weights), config, hard_mask=hard_mask)
    _, grads = backward(cost, 0)(embeddings)
    assert(relative_error(grads, finite_diff_gradient(cost, embeddings)) < 1e-6)


def test_contrastive_loss_identical_views():
    from clmm.models import FusionConfig
    from clmm.standard import (contrastive_loss, fuse_batch, masked_contrastive_loss,
                               sample_fusion_weights,)

    # every modality of every sample is the same unit vector
    embeddings = np.tile(np.array([1., 0., 0., 0.]), (3, 2, 1))
    weights = sample_fusion_weights(2, 2, (0.1, 0.9), np.random.default_rng(0))
    views = fuse_batch(embeddings, weights)
    assert(np.allclose(views.views, [1., 0., 0., 0.]))
    size = views.size
    config = FusionConfig(hard_ratio=0.5, hard_weight=1., temperature=1., view_count=2)
    loss = contrastive_loss(views, config)
    assert(np.isclose(loss, size * np.log(size - 1), rtol=0, atol=1e-12))
    assert(np.isclose(loss, 9.6566, atol=1e-4))

    anchor_mask = np.zeros(size, dtype=bool)
    anchor_mask[0] = True
    anchor_loss = masked_contrastive_loss(views.views, views.positive_mask(), 1.,
                                          anchor_mask=anchor_mask)
    assert(np.isclose(anchor_loss, np.log(size - 1), rtol=0, atol=1e-12))


def test_contrastive_loss_permutation():
    from clmm.standard import fuse_batch, masked_contrastive_loss, select_hard_positives

    rng = np.random.default_rng(22)
    views = fuse_batch(rng.normal(size=(4, 2, 5)), rng.uniform(0.1, 0.9, size=(3, 2)))
    positive_mask = views.positive_mask()
    hard_mask = select_hard_positives(views, 0.5)
    loss = masked_contrastive_loss(views.views, positive_mask, 0.5,
                                   hard_mask=hard_mask, hard_weight=0.7)
    for _ in range(3):
        order = rng.permutation(views.size)
        pairs = np.ix_(order, order)
        permuted = masked_contrastive_loss(views.views[order], positive_mask[pairs], 0.5,
                                           hard_mask=hard_mask[pairs], hard_weight=0.7)
        assert(np.isclose(permuted, loss, rtol=1e-12, atol=1e-12))
    #ENDFOR


def test_fuse():
    from clmm.models import DimensionError
    from clmm.standard import fuse, fuse_batch

    rng = np.random.default_rng(23)
    embeddings = rng.normal(size=(4, 3, 5))
    assert(np.allclose(fuse(embeddings[0], np.array([0., 1., 0.])), embeddings[0, 1]))
    assert(np.allclose(fuse(embeddings[0], np.full(3, 1. / 3)),
                       np.mean(embeddings[0], axis=0)))

    weights = rng.uniform(0.1, 0.9, size=(2, 3))
    fused = fuse(embeddings, weights)
    assert(fused.shape == (4, 2, 5))
    for i in range(4):
        for k in range(2):
            assert(np.allclose(fused[i, k], fuse(embeddings[i], weights[k])))
        #ENDFOR
    #ENDFOR

    # view s = i P + k belongs to sample i
    views = fuse_batch(embeddings, weights)
    assert(np.allclose(views.views[2 * 3 + 1], fused[3, 1]))
    assert(np.array_equal(views.owner, [0, 0, 1, 1, 2, 2, 3, 3]))

    with pytest.raises(DimensionError):
        fuse(embeddings, np.ones((2, 2)))
    with pytest.raises(DimensionError):
        fuse(embeddings[None], weights)
    with pytest.raises(DimensionError):
        fuse_batch(embeddings[0], weights)


def test_contrastive_loss_needs_negatives():
    from clmm.models import ContractError, FusionConfig
    from clmm.standard import contrastive_loss, fuse_batch

    views = fuse_batch(np.ones((1, 2, 4)), np.array([[0.5, 0.5], [0.3, 0.7]]))
    with pytest.raises(ContractError):
        contrastive_loss(views, FusionConfig())


def test_sample_fusion_weights():
    from clmm.standard import sample_fusion_weights

    weights = sample_fusion_weights(3, 5, (0.1, 0.9), np.random.default_rng(0))
    assert(weights.shape == (5, 3))
    assert(np.allclose(np.sum(weights, axis=1), 1.))
    assert(np.all(weights > 0))


def test_hard_positive_count():
    from clmm.standard import hard_positive_count

    assert(hard_positive_count(2, 0.02) == 1)
    assert(hard_positive_count(10, 0.5) == 5)
    assert(hard_positive_count(3, 1.) == 3)
    assert(hard_positive_count(4, 0.) == 0)
    assert(hard_positive_count(0, 0.5) == 0)


def test_select_hard_positives():
    from clmm.standard import (cosine_similarity_matrix, fuse_batch,
                               select_hard_positives,)

    rng = np.random.default_rng(13)
    views = fuse_batch(rng.normal(size=(4, 3, 5)), rng.uniform(0.1, 0.9, size=(3, 3)))
    hard_mask = select_hard_positives(views, 0.5)
    positive_mask = views.positive_mask()
    similarity = cosine_similarity_matrix(views.views)
    assert(not np.any(hard_mask & ~positive_mask))
    for s in range(views.size):
        positives = np.flatnonzero(positive_mask[s])
        # two positives per anchor, one of them hard: the least similar
        assert(np.sum(hard_mask[s]) == 1)
        assert(hard_mask[s, positives[np.argmin(similarity[s, positives])]])
    #ENDFOR
    assert(not np.any(select_hard_positives(views, 0.)))


def test_positive_probabilities_hard_weight():
    from clmm.standard import fuse_batch, positive_probabilities, select_hard_positives

    rng = np.random.default_rng(14)
    # positive entries keep every similarity positive
    views = fuse_batch(rng.uniform(0.1, 1., size=(3, 2, 4)),
                       np.array([[0.2, 0.8], [0.6, 0.4], [0.5, 0.5]]))
    positive_mask = views.positive_mask()
    hard_mask = select_hard_positives(views, 0.5)
    plain = positive_probabilities(views.views, positive_mask, 0.5)
    weighted = positive_probabilities(views.views, positive_mask, 0.5,
                                      hard_mask=hard_mask, hard_weight=0.8)
    assert(np.all(weighted[hard_mask] < plain[hard_mask]))
    assert(np.allclose(weighted[~hard_mask], plain[~hard_mask]))


### clmm.standard.costs.distill.py ###

def test_distill_loss():
    from clmm.models import DimensionError
    from clmm.standard import distill_loss

    loss = distill_loss(np.log(np.array([0.25, 0.75])), np.array([0., 0.]))
    assert(np.isclose(loss, 0.5 * np.log(2) + 0.5 * np.log(2. / 3)))
    assert(np.isclose(loss, 0.14384, atol=1e-5))

    logits = np.random.default_rng(0).normal(size=(4, 3))
    assert(np.isclose(distill_loss(logits, logits.copy()), 0., atol=1e-12))
    assert(distill_loss(logits, logits[::-1].copy()) > 0)
    with pytest.raises(DimensionError):
        distill_loss(np.zeros((2, 3)), np.zeros((2, 4)))


def test_cross_entropy():
    from clmm.models import ContractError, DimensionError
    from clmm.standard import cross_entropy

    assert(np.isclose(cross_entropy(np.zeros((1, 2)), [1]), np.log(2)))
    with pytest.raises(DimensionError):
        cross_entropy(np.zeros((1, 2)), [2])
    with pytest.raises(ContractError):
        cross_entropy(np.zeros((1, 2)), [None])


def test_stage_two_cost_gradients():
    from clmm.standard import (backward, cross_entropy, distill_loss,
                               finite_diff_gradient, relative_error,)

    for seed in range(3):
        rng = np.random.default_rng(60 + seed)
        auxiliary_logits = rng.normal(size=(4, 3))
        primary_logits = rng.normal(size=(4, 3))
        labels = rng.integers(0, 3, size=4)
        for cost in (lambda logits: distill_loss(logits, primary_logits),
                     lambda logits: cross_entropy(logits, labels)):
            _, grads = backward(cost, 0)(auxiliary_logits)
            assert(relative_error(grads, finite_diff_gradient(cost, auxiliary_logits)) < 1e-4)
        #ENDFOR
    #ENDFOR


### clmm.standard.metrics.py ###

def test_metrics_worked_examples():
    from clmm.standard import accuracy, cohen_kappa, macro_f1, per_class_f1

    cm = np.array([[2, 3], [3, 2]])
    assert(np.isclose(accuracy(cm), 0.4, rtol=0, atol=1e-9))
    assert(np.isclose(cohen_kappa(cm), -0.2, rtol=0, atol=1e-9))

    cm = np.array([[3, 1], [2, 4]])
    assert(np.allclose(per_class_f1(cm), [2. / 3, 8. / 11]))
    assert(np.isclose(macro_f1(cm), 0.69697, atol=1e-5))
    assert(np.isclose(macro_f1(cm, average="weighted"), (4 * 2. / 3 + 6 * 8. / 11) / 10))

    # marginals that are an outer product agree only by chance
    assert(np.isclose(cohen_kappa(np.outer([1, 2], [3, 4])), 0., atol=1e-12))
    assert(cohen_kappa(np.array([[5]])) == 0.)


def test_metrics_sklearn_oracle():
    from sklearn.metrics import accuracy_score, cohen_kappa_score, f1_score
    from clmm.standard import accuracy, cohen_kappa, confusion_matrix, macro_f1

    rng = np.random.default_rng(15)
    y_true = rng.integers(0, 4, size=200)
    y_pred = np.where(rng.uniform(size=200) < 0.6, y_true, rng.integers(0, 4, size=200))
    cm = confusion_matrix(y_true, y_pred, 4)
    labels = np.arange(4)
    assert(np.isclose(accuracy(cm), accuracy_score(y_true, y_pred)))
    assert(np.isclose(macro_f1(cm), f1_score(y_true, y_pred, labels=labels, average="macro")))
    assert(np.isclose(macro_f1(cm, average="weighted"),
                      f1_score(y_true, y_pred, labels=labels, average="weighted")))
    assert(np.isclose(cohen_kappa(cm), cohen_kappa_score(y_true, y_pred)))


def test_metrics_errors():
    from clmm.models import ContractError, DimensionError
    from clmm.standard import accuracy, confusion_matrix, macro_f1, metrics_report

    with pytest.raises(ContractError):
        accuracy(np.zeros((2, 2)))
    with pytest.raises(DimensionError):
        accuracy(np.ones((2, 3)))
    with pytest.raises(DimensionError):
        confusion_matrix([0, 1], [0], 2)
    with pytest.raises(ContractError):
        macro_f1(np.eye(2), average="micro")
    report = metrics_report(np.array([[3, 1], [2, 4]]), class_names=["walk", "sit"])
    assert(report["classes"] == ["walk", "sit"])
    assert(report["sample_count"] == 10)


### clmm.standard.data.augmentation.py ###

def test_time_warp_identity():
    from clmm.standard import apply_time_warp

    window = _ramp_window()
    warped = apply_time_warp(window, np.ones(5))
    for before, after in zip(window.modalities, warped.modalities):
        assert(np.allclose(before, after, rtol=0, atol=1e-12))
    #ENDFOR


def test_time_warp_shared_across_modalities():
    from clmm.models import AugmentationConfig
    from clmm.standard import time_warp

    applied = dict()
    observer = lambda j, output_knots, source_knots: applied.update({j: output_knots})
    # the second grid is every other point of the first
    window = _ramp_window(lengths=(33, 17))
    warped = time_warp(window, AugmentationConfig(), np.random.default_rng(16),
                       observer=observer)
    assert(np.array_equal(applied[0], applied[1]))
    assert(np.isclose(applied[0][0], 0.) and np.isclose(applied[0][-1], 1.))
    assert(np.allclose(warped.modalities[0][:2, ::2], warped.modalities[1][:2]))
    assert(warped.label == window.label)


def test_time_warp_ramp_slope():
    from clmm.standard import apply_time_warp, warp_knots

    # the second segment plays 1.2 times slower than the others
    factors = np.array([1., 1.2, 1., 1., 1.])
    output_knots, _ = warp_knots(factors)
    warped = apply_time_warp(_ramp_window(lengths=(1041, 521)), factors)
    for modality in warped.modalities:
        u = np.linspace(0., 1., modality.shape[1])
        slope = np.diff(modality[0]) / np.diff(u)

        def segment_slope(k):
            inside = (u[:-1] >= output_knots[k]) & (u[1:] <= output_knots[k + 1])
            return slope[inside]

        plain = segment_slope(0)
        stretched = segment_slope(1)
        assert(plain.size > 10 and stretched.size > 10)
        # every unit factor segment spans 1 / 5.2 of the output
        assert(np.allclose(plain, 2 * 5.2 / 5))
        assert(np.allclose(stretched, plain[0] / 1.2))
    #ENDFOR


def test_random_crop_step():
    from clmm.models import MultimodalWindow
    from clmm.standard import apply_random_crop

    offset = 0.2
    fraction = 0.5
    lengths = (101, 201)
    modalities = list()
    for length in lengths:
        step = np.zeros((1, length))
        step[:, (length - 1) // 2:] = 1.
        modalities.append(step)
    #ENDFOR
    cropped = apply_random_crop(MultimodalWindow(modalities), offset, fraction)
    for length, modality in zip(lengths, cropped.modalities):
        # the step at t = 0.5 moves to (0.5 - offset) / fraction
        shifted = int(round((0.5 - offset) / fraction * (length - 1)))
        assert(np.allclose(modality[0, :shifted - 1], 0., rtol=0, atol=1e-9))
        assert(np.isclose(modality[0, shifted - 1], 0.5, rtol=0, atol=1e-9))
        assert(np.allclose(modality[0, shifted:], 1., rtol=0, atol=1e-9))
    #ENDFOR


def test_random_crop():
    from clmm.standard import apply_random_crop

    window = _ramp_window()
    cropped = apply_random_crop(window, 0.05, 0.9)
    for modality in cropped.modalities:
        t = np.linspace(0., 1., modality.shape[1])
        assert(np.allclose(modality, 2 * (0.05 + 0.9 * t) + 1))
    #ENDFOR


def test_channel_scale_shared():
    from clmm.models import AugmentationConfig, MultimodalWindow
    from clmm.standard import channel_scale

    window = MultimodalWindow([np.ones((2, 8)), np.ones((3, 4))])
    scaled = channel_scale(window, AugmentationConfig(), np.random.default_rng(17))
    assert(np.allclose(scaled.modalities[0][:, 0], scaled.modalities[1][:2, 0]))


def test_augment_none():
    from clmm.models import AugmentationConfig
    from clmm.standard import augment

    window = _ramp_window()
    augmented = augment(window, AugmentationConfig(method="none"), np.random.default_rng(0))
    assert(augmented is not window)
    for before, after in zip(window.modalities, augmented.modalities):
        assert(np.array_equal(before, after))
    #ENDFOR


### clmm.standard.data.split.py ###

def test_split():
    from clmm.models import ConfigError, MultimodalWindow
    from clmm.standard import select_split, split

    windows = [MultimodalWindow([np.zeros((1, 4)), np.zeros((1, 4))], label=i % 3,
                                sample_id="s{}".format(i))
               for i in range(30)]
    unlabeled, train, test = split(windows, 0.2, np.random.default_rng(18), test_fraction=0.3)
    assert(len(train) == 6 and len(test) == 9 and len(unlabeled) == 15)
    assert(np.array_equal(np.bincount([w.label for w in train]), [2, 2, 2]))
    assert(all(w.label is None for w in unlabeled))
    ids = [w.sample_id for w in unlabeled + train + test]
    assert(len(set(ids)) == 30)
    assert(len(select_split(unlabeled + train + test, ("unlabeled", "train"))) == 21)

    with pytest.raises(ConfigError):
        split(windows[:9], 0.2, np.random.default_rng(0))
    with pytest.raises(ConfigError):
        select_split(windows, "validation")


### clmm.standard.data.synthetic.py ###

def _small_spec(**kwargs):
    from clmm.models import SyntheticSpec

    settings = dict(channels=(2, 3), class_count=3, latent_dim=2, noise_std=0.05,
                    samples_per_class=5, window_length=64)
    settings.update(kwargs)
    return SyntheticSpec(**settings)


def test_synth_generate():
    from clmm.standard import shuffle_labels, spectral_classify, synth_generate

    spec = _small_spec()
    windows = synth_generate(spec, np.random.default_rng(19))
    again = synth_generate(spec, np.random.default_rng(19))
    assert(len(windows) == 15)
    assert([w.modalities[0].shape for w in windows[:1]] == [(2, 64)])
    for a, b in zip(windows, again):
        assert(a.label == b.label)
        assert(all(np.array_equal(x, y) for x, y in zip(a.modalities, b.modalities)))
    #ENDFOR

    labels = np.array([w.label for w in windows])
    assert(np.array_equal(spectral_classify(windows, spec), labels))

    shuffled = shuffle_labels(windows, np.random.default_rng(20))
    assert(np.array_equal(np.bincount([w.label for w in shuffled]), np.bincount(labels)))


def test_synth_mixing_matrices():
    from clmm.models import ConfigError
    from clmm.standard import draw_mixing_matrices

    spec = _small_spec(mixing_matrices=[[[1., 0.], [0., 1.]],
                                        [[1., 1.], [1., 1.], [2., 2.]]])
    with pytest.raises(ConfigError):
        draw_mixing_matrices(spec, np.random.default_rng(0))


### clmm.standard.data.dataset.py ###

def test_dataset_round_trip(tmp_path):
    from clmm.standard import (load_dataset, save_dataset, synth_generate,
                               synthetic_manifest_entries,)

    spec = _small_spec()
    windows = synth_generate(spec, np.random.default_rng(21))
    windows = [w.replace(split="train" if i % 2 else "unlabeled")
               for i, w in enumerate(windows)]
    modalities, classes = synthetic_manifest_entries(spec)
    save_dataset(str(tmp_path), windows, modalities, classes)

    manifest, loaded = load_dataset(str(tmp_path), normalize=False)
    assert(manifest.classes == classes)
    assert(manifest.modality_names == ["m0", "m1"])
    for a, b in zip(windows, loaded):
        assert(a.sample_id == b.sample_id and a.label == b.label and a.split == b.split)
        assert(all(np.array_equal(x, y) for x, y in zip(a.modalities, b.modalities)))
    #ENDFOR

    _, normalized = load_dataset(str(tmp_path / "manifest.json"))
    for j in range(2):
        values = np.concatenate([w.modalities[j] for w in normalized], axis=1)
        assert(np.allclose(np.mean(values, axis=1), 0., atol=1e-6))
        assert(np.allclose(np.std(values, axis=1), 1., atol=1e-6))
    #ENDFOR


def _write_tiny_dataset(root, csv_text, label="walk"):
    import json

    (root / "acc").mkdir(parents=True, exist_ok=True)
    (root / "gyro").mkdir(parents=True, exist_ok=True)
    (root / "acc" / "s0.csv").write_text(csv_text)
    (root / "gyro" / "s0.csv").write_text("g0,g1\n1,2\n3,4\n")
    manifest = {"classes": ["walk", "sit"],
                "modalities": [{"name": "acc", "channels": 2, "rate_hz": 1, "window_len": 2},
                               {"name": "gyro", "channels": 2, "rate_hz": 1,
                                "window_len": 2}],
                "samples": [{"id": "s0", "files_per_modality": ["acc/s0.csv", "gyro/s0.csv"],
                             "label": label}]}
    (root / "manifest.json").write_text(json.dumps(manifest))


def test_dataset_load_errors(tmp_path):
    from clmm.models import ConfigError, LoadError
    from clmm.standard import load_dataset, select_modalities

    with pytest.raises(LoadError):
        load_dataset(str(tmp_path / "missing"))

    _write_tiny_dataset(tmp_path / "good", "a0,a1\n1,2\n3,4\n")
    manifest, windows = load_dataset(str(tmp_path / "good"), normalize=False)
    assert(windows[0].label == 0)
    assert(np.array_equal(windows[0].modalities[0], [[1., 3.], [2., 4.]]))
    with pytest.raises(ConfigError):
        select_modalities(manifest, windows, ["acc", "mag"])
    with pytest.raises(ConfigError):
        select_modalities(manifest, windows, ["acc"])

    _write_tiny_dataset(tmp_path / "missing_value", "a0,a1\n1,2\n3,\n")
    with pytest.raises(LoadError):
        load_dataset(str(tmp_path / "missing_value"))

    _write_tiny_dataset(tmp_path / "not_numeric", "a0,a1\n1,2\n3,x\n")
    with pytest.raises(LoadError):
        load_dataset(str(tmp_path / "not_numeric"))

    _write_tiny_dataset(tmp_path / "columns", "a0,a1,a2\n1,2,3\n3,4,5\n")
    with pytest.raises(LoadError):
        load_dataset(str(tmp_path / "columns"))

    _write_tiny_dataset(tmp_path / "label", "a0,a1\n1,2\n3,4\n", label="run")
    with pytest.raises(LoadError):
        load_dataset(str(tmp_path / "label"))


### clmm.standard.utils.checkpoint.py ###

def test_checkpoint(tmp_path):
    from clmm.models import IntegrityError
    from clmm.standard import (decode_checkpoint, encode_checkpoint,
                               load_checkpoint, save_checkpoint,)

    tensors = {"encoder/m0/conv0/kernel": np.arange(24.).reshape(2, 3, 4),
               "qom_prior": np.array([0.25, 0.75]),
               "state/step": np.array(7.)}
    payload = encode_checkpoint(tensors, 2)
    stage, decoded = decode_checkpoint(payload)
    assert(stage == 2)
    assert(sorted(decoded) == sorted(tensors))
    for name in tensors:
        assert(np.array_equal(decoded[name], tensors[name]))
        assert(decoded[name].shape == np.shape(tensors[name]))
    #ENDFOR

    corrupted = bytearray(payload)
    corrupted[20] ^= 0xff
    with pytest.raises(IntegrityError):
        decode_checkpoint(bytes(corrupted))
    with pytest.raises(IntegrityError):
        decode_checkpoint(payload[:-7])
    with pytest.raises(IntegrityError):
        decode_checkpoint(b"NOPE" + payload[4:])
    with pytest.raises(IntegrityError):
        encode_checkpoint(tensors, 3)

    file_path = str(tmp_path / "stage2.ckpt")
    assert(save_checkpoint(file_path, tensors, 2) == len(payload))
    assert(load_checkpoint(file_path)[0] == 2)
    with pytest.raises(IntegrityError):
        load_checkpoint(file_path, expected_stage=1)


### clmm.standard.optimizers.sgd.py ###

def test_sgd():
    from clmm.models import DimensionError
    from clmm.standard import SGD

    optimizer = SGD(learning_rate=0.1, momentum=0.5)
    params = optimizer.update(np.array([1., 2.]), np.array([0., 0.]))
    assert(np.allclose(params, [-0.1, -0.2]))
    params = optimizer.update(np.array([1., 2.]), params)
    # v = 0.5 g + g
    assert(np.allclose(params, [-0.25, -0.5]))
    with pytest.raises(DimensionError):
        optimizer.update(np.ones(3), np.ones(3))

    jacobian = lambda x: (2 * x, False)
    result = SGD(learning_rate=0.1).run(lambda x: np.sum(x ** 2), 100,
                                        np.array([3., -1.]), jacobian)
    assert(np.allclose(result, 0., atol=1e-8))

    # the jacobian alone drives the steps and may stop the run early
    steps = list()
    def jacobian(x, steps):
        steps.append(x)
        return 2 * x, len(steps) > 3
    result = SGD(learning_rate=0.1).run(None, 100, np.array([3., -1.]), jacobian,
                                        args=(steps,))
    assert(len(steps) == 4)
    assert(np.allclose(result, np.array([3., -1.]) * 0.8 ** 3))


### clmm.models.configs.py ###

def test_run_config():
    from clmm.models import ConfigError, EncoderConfig, RunConfig

    config = RunConfig.from_dict({"seed": 3, "fusion": {"hard_weight": 0.5},
                                  "augmentation": {"method": "random_crop"}})
    assert(config.seed == 3 and config.fusion.hard_weight == 0.5)
    again = RunConfig.from_dict(config.to_dict())
    assert(again.to_dict() == config.to_dict())

    with pytest.raises(ConfigError):
        RunConfig.from_dict({"fusion": {"hardness": 0.5}})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"stage3": {}})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"augmentation": {"method": "mixup"}})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"seed": -1})
    with pytest.raises(ConfigError):
        EncoderConfig(cnn_channels=(4, 6), feature_dim=8)
    with pytest.raises(ConfigError):
        EncoderConfig(channels=(3,), window_lengths=(16,))


def _test_all():
    import tempfile
    from pathlib import Path

    test_backward()
    test_finite_diff_gradient()
    test_softmax()
    test_matmul()
    test_matmul_gradient()
    test_l2_normalize()
    test_linear_interpolation_matrix()
    test_conv1d()
    test_conv1d_gradient()
    test_encoder_shapes()
    test_encoder_wrong_channels()
    test_differential_attention()
    test_diff_attention_gradient()
    test_encode_project_gradient()
    test_mix_quality_weights()
    test_quality_weights()
    test_qom_prior()
    test_bigru()
    test_dual_branch_forward()
    test_classify_gradient()
    test_contrastive_canonical_value()
    test_contrastive_loss_oracle()
    test_contrastive_loss_gradient()
    test_contrastive_loss_identical_views()
    test_contrastive_loss_permutation()
    test_fuse()
    test_contrastive_loss_needs_negatives()
    test_sample_fusion_weights()
    test_hard_positive_count()
    test_select_hard_positives()
    test_positive_probabilities_hard_weight()
    test_distill_loss()
    test_cross_entropy()
    test_stage_two_cost_gradients()
    test_metrics_worked_examples()
    test_metrics_sklearn_oracle()
    test_metrics_errors()
    test_time_warp_identity()
    test_time_warp_shared_across_modalities()
    test_time_warp_ramp_slope()
    test_random_crop_step()
    test_random_crop()
    test_channel_scale_shared()
    test_augment_none()
    test_split()
    test_synth_generate()
    test_synth_mixing_matrices()
    with tempfile.TemporaryDirectory() as directory:
        test_dataset_round_trip(Path(directory) / "round_trip")
        test_dataset_load_errors(Path(directory) / "load_errors")
        test_checkpoint(Path(directory))
    #ENDWITH
    test_sgd()
    test_run_config()


if __name__ == "__main__":
    _test_all()

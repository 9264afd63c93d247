# SPDX-FileCopyrightText: fex contributors
#
# SPDX-License-Identifier: Apache-2.0

import unittest

import numpy as np

from fex.commons.nnet import AdamState, GradientBundle, MlpNetwork, NetworkError, adam_step, finite_diff_check

def quadratic(out):
	return 0.5 * float(np.sum(out ** 2)), out

def weighted(weights):
	return lambda out: (float(np.sum(weights * out)), np.broadcast_to(weights, out.shape))

class TestingNnet(unittest.TestCase):

	def test_identity_forward(self):
		net = MlpNetwork([2, 2], "identity", weights=[np.eye(2)], biases=[np.zeros(2)])
		self.assertEqual(net.forward([1.0, 2.0]).tolist(), [1.0, 2.0])

	def test_zero_sigmoid(self):
		net = MlpNetwork.zeros([3, 4], "sigmoid")
		self.assertEqual(net.forward([5.0, -1.0, 2.0]).tolist(), [0.5] * 4)

	def test_softmax_is_prob_vector(self):
		net = MlpNetwork([3, 5, 4], "softmax", seed=2)
		out = net.forward(np.random.default_rng(0).normal(size=(7, 3)))
		self.assertTrue(np.all(out >= 0))
		np.testing.assert_allclose(out.sum(axis=1), 1.0, atol=1e-12)

	def test_forward_deterministic(self):
		net = MlpNetwork([3, 5, 2], "sigmoid", seed=3)
		x = [0.1, -0.4, 0.9]
		first = net.forward(x)
		self.assertTrue(np.array_equal(first, net.forward(x)))
		self.assertTrue(np.array_equal(first, MlpNetwork([3, 5, 2], "sigmoid", seed=3).forward(x)))

	def test_dimension_mismatch(self):
		net = MlpNetwork([3, 2], "identity", seed=0)
		with self.assertRaises(NetworkError):
			net.forward([1.0, 2.0])
		with self.assertRaises(NetworkError):
			net.backward([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])

	def test_zero_hidden_units_rejected(self):
		with self.assertRaises(NetworkError) as ctx:
			MlpNetwork([3, 0, 2], "identity")
		self.assertEqual(ctx.exception.category, "precondition")

	def test_linear_gradient(self):
		net = MlpNetwork([1, 1], "identity", weights=[[[1.0]]], biases=[[0.0]])
		grads = net.backward([2.0], [3.0])
		self.assertEqual(grads.weights[0].tolist(), [[6.0]])
		self.assertEqual(grads.biases[0].tolist(), [3.0])

	def test_zero_upstream(self):
		net = MlpNetwork([4, 6, 3], "sigmoid", seed=1)
		grads = net.backward(np.ones(4), np.zeros(3))
		self.assertFalse(np.any(grads.flat()))

	def test_finite_differences_identity(self):
		net = MlpNetwork([3, 2], "identity", seed=4)
		self.assertLessEqual(finite_diff_check(net, [0.5, -1.0, 2.0], quadratic), 1e-6)

	def test_finite_differences_random(self):
		rng = np.random.default_rng(5)
		for i in range(20):
			activation = MlpNetwork.OUTPUT_ACTIVATIONS[i % 3]
			net = MlpNetwork([4, 6, 3], activation, seed=i)
			x = rng.normal(size=(2, 4))
			probe = weighted(rng.normal(size=3))
			self.assertLessEqual(finite_diff_check(net, x, probe, floor=1e-6), 1e-4)

	def test_gradient_bundle_arithmetic(self):
		net = MlpNetwork([2, 3, 1], "identity", seed=0)
		g = net.backward([1.0, 1.0], [1.0])
		np.testing.assert_allclose((g + g).flat(), (2 * g).flat())
		self.assertEqual(GradientBundle.zeros_like(net).flat().shape, (net.n_parameters(),))

	def test_adam_zero_gradient(self):
		net = MlpNetwork([3, 4, 2], "identity", seed=0)
		before = [p.copy() for p in net.parameters()]
		adam_step(net, GradientBundle.zeros_like(net), AdamState(net), 1e-2)
		for a, b in zip(before, net.parameters()):
			self.assertTrue(np.array_equal(a, b))

	def test_adam_first_step(self):
		net = MlpNetwork([3, 4, 2], "identity", seed=0)
		before = net.copy()
		grads = net.backward([1.0, -2.0, 0.5], [1.0, -3.0])
		adam_step(net, grads, AdamState(net), 1e-3)
		for p, q, g in zip(net.parameters(), before.parameters(), grads.arrays()):
			np.testing.assert_allclose(p - q, -1e-3 * np.sign(g), atol=1e-6)

	def test_adam_scalar_quadratic(self):
		net = MlpNetwork([1, 1], "identity", weights=[[[1.0]]], biases=[[0.0]])
		state = AdamState(net)
		reached = False
		for _ in range(200):
			w = net.weights[0]
			adam_step(net, GradientBundle([2.0 * w], [np.zeros(1)]), state, 0.05)
			if abs(net.weights[0][0, 0]) < 0.1:
				reached = True
				break
		self.assertTrue(reached)

	def test_adam_shape_mismatch(self):
		net = MlpNetwork([2, 2], "identity", seed=0)
		other = MlpNetwork([3, 2], "identity", seed=0)
		with self.assertRaises(NetworkError):
			adam_step(net, GradientBundle.zeros_like(other), AdamState(net), 1e-3)

	def test_permuted_inputs(self):
		net = MlpNetwork([5, 7, 2], "softmax", seed=8)
		perm = np.array([3, 0, 4, 1, 2])
		permuted = net.copy()
		permuted.weights[0] = net.weights[0][:, perm]
		x = np.random.default_rng(2).uniform(size=(10, 5))
		np.testing.assert_allclose(permuted.forward(x[:, perm]), net.forward(x), rtol=1e-12, atol=1e-14)

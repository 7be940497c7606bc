"""
sgd.py - a module for defining the Stochastic Gradient Descent optimizer
"""

import numpy as np

from clmm.models.errors import DimensionError

class SGD(object):
    """
    a class to define the Stochastic Gradient Descent optimizer
    with heavy-ball momentum:
        v <- momentum * v + g
        params <- params - learning_rate * v

    Fields:
    learning_rate :: float - the step size
    momentum :: float in [0, 1) - the velocity decay
    velocity :: numpy.ndarray - the running velocity, None until
        the first update
    """
    name = "sgd"

    def __init__(self, learning_rate=1e-3, momentum=0.):
        """
        See class definition for argument specifications.
        """
        super().__init__()
        self.learning_rate = learning_rate
        self.momentum = momentum
        self.velocity = None


    def __str__(self):
        return ("{}, lr: {}, momentum: {}"
                "".format(self.name, self.learning_rate, self.momentum))


    def run(self, function, iteration_count,
            initial_params, jacobian, args=()):
        """
        Run a SGD optimization series.
        Args:
        args :: any - a tuple of arguments to pass to the function
            and jacobian
        function :: any -> float
            - the function to minimize, unused by SGD and may be None
              since the jacobian reports everything a step needs
        iteration_count :: int - how many iterations to perform
        initial_params :: numpy.ndarray - the initial optimization values
        jacobian :: any -> tuple(grads :: numpy.ndarray, terminate :: bool)
            - the gradients of the function with respect to the params
        Returns:
        params :: numpy.ndarray - the final optimization values
        """
        self.velocity = None
        params = initial_params
        for i in range(iteration_count):
            grads, terminate = jacobian(params, *args)
            if terminate:
                break
            params = self.update(grads, params)
        #ENDFOR
        return params


    def update(self, grads, params):
        """Update the learning parameters for the current iteration.
        Args:
        grads :: numpy.ndarray - the gradients of the cost function with
            respect to each learning parameter for the current iteration
        params :: numpy.ndarray - the learning parameters for the current
            iteration
        Returns:
        new_params :: numpy.ndarray - the learning parameters for the
            next iteration
        """
        grads = np.asarray(grads, dtype=np.float64)
        params = np.asarray(params, dtype=np.float64)
        if grads.shape != params.shape:
            raise DimensionError("SGD grads of shape {} do not match params of shape {}."
                                 "".format(grads.shape, params.shape))
        if self.velocity is None:
            self.velocity = np.zeros_like(params)
        elif self.velocity.shape != params.shape:
            raise DimensionError("SGD velocity of shape {} does not match params of shape {}."
                                 "".format(self.velocity.shape, params.shape))
        self.velocity = self.momentum * self.velocity + grads

        return params - self.learning_rate * self.velocity

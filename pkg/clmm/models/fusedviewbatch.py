"""
fusedviewbatch.py - This module defines a class that encapsulates
the fused contrastive views of one batch.
"""

import autograd.numpy as anp
import numpy as np

from clmm.models.errors import DimensionError

class FusedViewBatch(object):
    """
    This class encapsulates the P fused views of each of N raw samples.
    View s = i P + k is the k-th fused view of sample i.

    Fields:
    owner :: ndarray (P N) - the raw sample index of each view
    sample_count :: int - N
    view_count :: int - P
    views :: ndarray (P N x D_proj) - the fused vectors, differentiable
        with respect to the embeddings they were built from
    """

    def __init__(self, fused):
        """
        Arguments:
        fused :: ndarray (N x P x D_proj) - the views of each sample, see
            clmm.standard.costs.contrastive.fuse
        """
        super().__init__()
        fused_shape = anp.shape(fused)
        if len(fused_shape) != 3:
            raise DimensionError("FusedViewBatch expects fused views of shape (N x P x D), "
                                 "got {}.".format(fused_shape))
        self.sample_count, self.view_count, dimension = fused_shape
        self.views = anp.reshape(fused, (self.sample_count * self.view_count, dimension))
        self.owner = np.repeat(np.arange(self.sample_count), self.view_count)


    @property
    def size(self):
        return self.sample_count * self.view_count


    def positive_mask(self):
        """
        Returns:
        mask :: ndarray (S x S) - True where p is in P(s), i.e. p has the
            same owner as s and p != s
        """
        same_owner = self.owner[:, None] == self.owner[None, :]
        return same_owner & ~np.eye(self.size, dtype=bool)


    def candidate_mask(self):
        """
        Returns:
        mask :: ndarray (S x S) - True where a is in S minus {s}
        """
        return ~np.eye(self.size, dtype=bool)

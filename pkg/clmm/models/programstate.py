"""
programstate.py - This module defines classes to encapsulate data fields
necessary to execute clmm training programs, including their progress
logs and h5 history files.
"""

import json
import logging

from filelock import FileLock, Timeout
import h5py
import numpy as np

from clmm.models.programtype import ProgramType

logger = logging.getLogger(__name__)

_LOCK_TIMEOUT = 10

class ProgramState(object):
    """
    This class encapsulates data fields that are used
    by every training program.

    Fields:
    config_json :: str - the effective run configuration
    costs :: list(Cost)
    final_iteration :: int
    iteration_count :: int - epochs for stage 1, optimizer steps for stage 2
    log_iteration_step :: int
    optimizer :: SGD
    program_type :: ProgramType
    save_count :: int - rows of the history file
    save_file_lock_path :: str
    save_file_path :: str
    save_iteration_step :: int
    should_log :: bool
    should_save :: bool
    """
    method = "parent_program"
    history_fields = tuple()
    log_header = ""

    def __init__(self, config_json, costs, iteration_count,
                 log_iteration_step, optimizer, program_type,
                 save_file_path, save_iteration_step,):
        """
        See class fields for arguments not listed here.
        """
        super().__init__()
        self.config_json = config_json
        self.costs = costs
        self.final_iteration = iteration_count - 1
        self.iteration_count = iteration_count
        self.log_iteration_step = log_iteration_step
        self.optimizer = optimizer
        self.program_type = program_type
        self.save_file_lock_path = "{}.lock".format(save_file_path)
        self.save_file_path = save_file_path
        self.save_iteration_step = save_iteration_step
        self.should_log = log_iteration_step != 0
        self.should_save = ((save_iteration_step != 0)
                            and (not (save_file_path is None))
                            and iteration_count > 0)
        save_count = 0
        if self.should_save:
            save_count, save_count_remainder = np.divmod(iteration_count,
                                                         save_iteration_step)
            # The final iteration is always saved.
            if save_count_remainder != 0:
                save_count += 1
        self.save_count = int(save_count)


    def _is_due(self, iteration, step):
        return np.mod(iteration, step) == 0 or iteration == self.final_iteration


    def log_and_save_initial(self):
        """
        Create the history file and print the log header.
        """
        if self.should_save:
            logger.info("clmm is saving this %s run to %s.", self.program_type,
                        self.save_file_path)
            try:
                with FileLock(self.save_file_lock_path, timeout=_LOCK_TIMEOUT):
                    with h5py.File(self.save_file_path, "w") as save_file:
                        save_file["config"] = self.config_json
                        save_file["cost_names"] = np.array([np.bytes_("{}".format(cost))
                                                            for cost in self.costs])
                        save_file["iteration"] = np.full(self.save_count, -1, dtype=np.int64)
                        save_file["iteration_count"] = self.iteration_count
                        save_file["method"] = self.method
                        save_file["optimizer"] = "{}".format(self.optimizer)
                        save_file["program_type"] = self.program_type.value
                        for field in self.history_fields:
                            save_file[field] = np.repeat(np.nan, self.save_count)
                        #ENDFOR
                    #ENDWITH
                #ENDWITH
            except Timeout:
                logger.warning("Timeout while locking %s, could not perform initial save.",
                               self.save_file_lock_path)
        #ENDIF

        if self.should_log:
            logger.info(self.log_header)


    def _save(self, iteration, values):
        if not (self.should_save and self._is_due(iteration, self.save_iteration_step)):
            return
        save_step, _ = np.divmod(iteration, self.save_iteration_step)
        try:
            with FileLock(self.save_file_lock_path, timeout=_LOCK_TIMEOUT):
                with h5py.File(self.save_file_path, "a") as save_file:
                    save_file["iteration"][save_step] = iteration
                    for field, value in zip(self.history_fields, values):
                        save_file[field][save_step] = value
                    #ENDFOR
                #ENDWITH
            #ENDWITH
        except Timeout:
            logger.warning("Timeout while locking %s to save after iteration %d.",
                           self.save_file_lock_path, iteration)


class PretrainState(ProgramState):
    """
    This class encapsulates the data fields used by the
    clmm.core.pretrain.pretrain_contrastive program.

    Fields: see ProgramState
    """
    method = "pretrain_contrastive"
    history_fields = ("loss", "grads_l2",)
    log_header = ("epoch  |      loss      |    grads_l2   \n"
                  "=========================================")

    def __init__(self, config_json, costs, epoch_count, log_epoch_step,
                 optimizer, save_file_path, save_epoch_step,):
        super().__init__(config_json, costs, epoch_count, log_epoch_step,
                         optimizer, ProgramType.PRETRAIN,
                         save_file_path, save_epoch_step,)


    def log_and_save(self, epoch, loss, grads_l2):
        """
        If necessary, log and save the epoch mean loss.

        Arguments:
        epoch :: int
        loss :: float - the mean batch loss of the epoch
        grads_l2 :: float - the mean gradient norm of the epoch

        Returns: none
        """
        if epoch > self.final_iteration:
            return
        if self.should_log and self._is_due(epoch, self.log_iteration_step):
            logger.info("{:^6d} | {:^1.8e} | {:^1.8e}".format(epoch, loss, grads_l2))
        self._save(epoch, (loss, grads_l2))


class FinetuneState(ProgramState):
    """
    This class encapsulates the data fields used by the
    clmm.core.finetune.finetune_collaborative program.

    Fields: see ProgramState
    """
    method = "finetune_collaborative"
    history_fields = ("ce", "distill", "total", "alpha", "grads_l2",)
    log_header = ("step   |       ce       |    distill     |   alpha  \n"
                  "=====================================================")

    def __init__(self, config_json, costs, step_count, log_iteration_step,
                 optimizer, save_file_path, save_iteration_step,):
        super().__init__(config_json, costs, step_count, log_iteration_step,
                         optimizer, ProgramType.FINETUNE,
                         save_file_path, save_iteration_step,)


    def log_and_save(self, step, ce, distill, total, alpha, grads_l2):
        """
        If necessary, log and save the loss components of one step.

        Returns: none
        """
        if step > self.final_iteration:
            return
        if self.should_log and self._is_due(step, self.log_iteration_step):
            logger.info("{:^6d} | {:^1.8e} | {:^1.8e} | {:^1.6f}"
                        "".format(step, ce, distill, alpha))
        self._save(step, (ce, distill, total, alpha, grads_l2))


def config_to_json(config):
    return json.dumps(config.to_dict(), sort_keys=True)

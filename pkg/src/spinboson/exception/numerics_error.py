# Copyright 2024 Jacob Baumbach
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Exceptions raised while solving, diagonalizing or analyzing"""
from typing import Any, List, Optional, Sequence, Tuple


class SpinBosonError(Exception):
    """Exception carrying a list of explanation lines.

    Args:
        msg (List[str]): explanation about the exception, one line per entry
        child (Optional[SpinBosonError]): an exception produced by a downstream
            step that caused this one
    """

    def __init__(self, msg: List[str], child: Optional["SpinBosonError"] = None) -> None:
        super().__init__()
        self.msg = msg
        self.child = child

    def to_str(self, seed: str = "") -> str:
        """Render the explanation, indenting nested causes.

        Args:
            seed (str): indentation prepended to every line

        Returns:
            str: information about the error
        """
        prefix = "\n" + seed if seed else ""
        line_break = "\n" + seed
        outer_msg = prefix + line_break.join(self.msg)
        if self.child is None:
            return outer_msg
        return outer_msg + self.child.to_str(seed + "\t")

    def __str__(self) -> str:
        return self.to_str()

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.to_str()!r})"

    def __eq__(self, other: Any) -> bool:
        if type(self) != type(other):  # noqa: E721
            return False
        return self.msg == other.msg and self.child == other.child

    def __hash__(self) -> int:
        return hash((type(self).__name__, tuple(self.msg)))


class DimensionMismatchError(SpinBosonError):
    """Arrays that must share N or M disagree

    Args:
        what (str): the quantity being checked
        expected (Tuple[int, ...]): shape required
        received (Tuple[int, ...]): shape found
    """

    def __init__(
        self, what: str, expected: Tuple[int, ...], received: Tuple[int, ...]
    ) -> None:
        msg = [f"{what} has shape {received}", f"but shape {expected} was required"]
        super().__init__(msg)
        self.expected = expected
        self.received = received


class DegenerateStateError(SpinBosonError):
    """The norm of a variational state vanished

    Args:
        norm (float): the offending norm
        threshold (float): smallest admissible norm
    """

    def __init__(self, norm: float, threshold: float) -> None:
        msg = [
            f"state norm {norm:.3e} is below {threshold:.1e}",
            "the weights A, B cancel or vanish",
        ]
        super().__init__(msg)
        self.norm = norm


class ImaginaryResidueError(SpinBosonError):
    """A quantity that must be real carries a large imaginary part

    Args:
        what (str): name of the quantity
        value (complex): the offending value
        tolerance (float): largest admissible imaginary part
    """

    def __init__(self, what: str, value: complex, tolerance: float) -> None:
        msg = [
            f"{what} = {value!r} has an imaginary part above {tolerance:.1e}",
            "kernels are inconsistent with the state",
        ]
        super().__init__(msg)
        self.value = value


class NonConvergenceError(SpinBosonError):
    """No restart trajectory met the convergence criteria

    Args:
        restarts (int): number of trajectories attempted
        best_energy (Optional[float]): lowest energy reached by any trajectory
        best_residual (Optional[float]): fixed-point residual of that trajectory
    """

    def __init__(
        self,
        restarts: int,
        best_energy: Optional[float] = None,
        best_residual: Optional[float] = None,
    ) -> None:
        msg = [f"none of {restarts} trajectories converged"]
        if best_energy is not None:
            msg.append(
                f"lowest energy reached {best_energy:.12e} "
                f"with parameter residual {best_residual:.3e}"
            )
        super().__init__(msg)
        self.restarts = restarts
        self.best_energy = best_energy


class OracleConvergenceError(SpinBosonError):
    """The truncated Fock ground energy did not settle under cutoff doubling

    Args:
        energies (Sequence[Tuple[int, float]]): (cutoff, energy) pairs tried
        tolerance (float): required change between doublings
    """

    def __init__(self, energies: Sequence[Tuple[int, float]], tolerance: float) -> None:
        msg = [f"ground energy did not converge to {tolerance:.1e} in the cutoff"]
        msg.extend(f"\tcutoff {c}: E0 = {e:.14e}" for c, e in energies)
        super().__init__(msg)
        self.energies = list(energies)


class NoTransitionError(SpinBosonError):
    """An estimator found no transition in the sweep

    Args:
        estimator (str): name of the estimator
        reason (str): why it did not fire
    """

    def __init__(self, estimator: str, reason: str) -> None:
        super().__init__([f"estimator {estimator!r} found no transition", reason])
        self.estimator = estimator


class NotApplicableError(SpinBosonError):
    """An analysis does not apply to the given record

    Args:
        analysis (str): name of the analysis
        reason (str): why it does not apply
    """

    def __init__(self, analysis: str, reason: str) -> None:
        super().__init__([f"{analysis} is not applicable", reason])


class FitWindowError(SpinBosonError):
    """The data offered to a fit cannot constrain it

    Args:
        what (str): name of the fit
        reason (str): what is missing
    """

    def __init__(self, what: str, reason: str) -> None:
        super().__init__([f"cannot fit {what}", reason])


class ManifestMismatchError(SpinBosonError):
    """A run directory belongs to a different configuration

    Args:
        directory (str): the run directory
        expected (str): fingerprint stored in its manifest
        received (str): fingerprint of the current configuration
    """

    def __init__(self, directory: str, expected: str, received: str) -> None:
        msg = [
            f"refusing to resume {directory}",
            f"manifest fingerprint {expected} != configuration fingerprint {received}",
        ]
        super().__init__(msg)

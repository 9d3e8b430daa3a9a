class DegenerateGeometryError(ValueError):
    """Zero-length link vector where a direction or path loss is needed."""


class ScenarioError(ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class InfeasibleError(RuntimeError):
    stage = 0

    def __init__(self, message, k=None, epsilon=None):
        self.k = k
        self.epsilon = epsilon
        super().__init__(message)

    def to_dict(self):
        out = {"stage": self.stage, "reason": str(self)}
        if self.k is not None:
            out["k"] = self.k
        if self.epsilon is not None:
            out["epsilon"] = self.epsilon
        return out


class Stage1Infeasible(InfeasibleError):
    stage = 1


class Stage2Infeasible(InfeasibleError):
    stage = 2


class EnumerationLimitError(RuntimeError):
    pass

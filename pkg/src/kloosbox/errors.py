"""Exception types shared across the package."""


class NotCoprime(ValueError):
    """An argument that must be a unit modulo q is not."""


class BudgetExceeded(RuntimeError):
    """A computation would exceed its configured work or memory limit."""


def check_budget(name: str, cost: int, limit: int) -> None:
    if cost > limit:
        raise BudgetExceeded(f"{name}: cost {cost} exceeds limit {limit}")

"""k-FCIDUMP fixture generation bridge."""

from .generate import EngineUnavailableError, SystemRecipe, generate_fixture

__all__ = ["EngineUnavailableError", "SystemRecipe", "generate_fixture"]

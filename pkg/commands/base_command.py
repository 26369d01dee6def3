# commands/base_command.py

from abc import ABC, abstractmethod
import logging
from pathlib import Path

from core.errors import SSCSError
from storage.provenance import write_sidecar

logger = logging.getLogger(__name__)


class BaseCommand(ABC):
    """Abstract base class for all CLI subcommands"""

    def __init__(self):
        self.command_name = self.__class__.__name__.replace("Command", "").lower()

    @abstractmethod
    def validate(self, **kwargs) -> tuple:
        """Check inputs before any work is done

        Returns:
            tuple: (success: bool, message: str)
        """
        pass

    @abstractmethod
    def execute(self, **kwargs) -> dict:
        """Do the work; may raise

        Returns:
            dict: command-specific fields, "outputs" listing written files
        """
        pass

    def run(self, **kwargs) -> dict:
        """Validate, execute and wrap the outcome

        Returns:
            dict: {
                "success": bool,
                "outputs": list,
                "flagged_fraction": float (analysis commands),
                "error": str or None
            }
        """
        ok, message = self.validate(**kwargs)
        if not ok:
            logger.error(f"[CMD] {self.command_name}: {message}")
            return {"success": False, "outputs": [], "error": message}
        try:
            result = self.execute(**kwargs)
        except SSCSError as e:
            logger.error(f"[CMD] {self.command_name} failed: {e}", exc_info=True)
            return {"success": False, "outputs": [], "error": f"{type(e).__name__}: {e}"}
        except Exception as e:
            logger.critical(f"[CMD] {self.command_name} crashed: {e}", exc_info=True)
            return {"success": False, "outputs": [], "error": str(e)}

        result.setdefault("success", True)
        result.setdefault("outputs", [])
        result.setdefault("error", None)
        logger.info(f"[CMD] {self.command_name} finished: {len(result['outputs'])} file(s) written")
        return result

    @staticmethod
    def output_dir(config) -> Path:
        path = Path(config.output_dir)
        path.mkdir(parents=True, exist_ok=True)
        return path

    @staticmethod
    def record_output(result: dict, path, config=None, seed: int = None, extra: dict = None):
        """Attach a provenance sidecar and list the file in the result"""
        write_sidecar(path, config, seed, extra)
        result.setdefault("outputs", []).append(str(path))

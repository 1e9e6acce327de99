import json
import logging
import os

import numpy as np

from src.errors import DatasetFormatError, ToolkitError
from src.models.ovr_model import OvRModel
from src.models.prediction import PredictionSet

# Configure logging
logger = logging.getLogger(__name__)


class ArtifactStore:
    """
    Reads and writes every file the toolkit produces.
    Owns the output directory used by the experiment, verify and split commands.
    """

    def __init__(self, directory=None):
        """
        Initialize the artifact store.

        Args:
            directory (str, optional): Output directory, MLC_OUTPUT_DIR or ./output by default
        """
        self.directory = directory

    def open(self, directory=None):
        """
        Create the output directory if needed.

        Args:
            directory (str, optional): Output directory replacing the current one

        Returns:
            bool: True once the directory exists
        """
        self.directory = directory or self.directory or os.environ.get("MLC_OUTPUT_DIR", "output")
        try:
            os.makedirs(self.directory, exist_ok=True)
            logger.info(f"Writing artifacts to {self.directory}")
            return True
        except OSError as e:
            logger.error(f"Failed to create output directory {self.directory}: {str(e)}")
            raise ToolkitError(f"cannot create output directory {self.directory}: {e}")

    def path(self, name):
        """Location of a named artifact inside the output directory."""
        return os.path.join(self.directory, name)

    def write_text(self, path, text):
        parent = os.path.dirname(path)
        if parent:
            os.makedirs(parent, exist_ok=True)
        with open(path, "w") as f:
            f.write(text)
        logger.debug(f"Wrote {path}")
        return path

    def read_text(self, path):
        if not os.path.exists(path):
            logger.error(f"Missing artifact {path}")
            raise DatasetFormatError("file does not exist", path=path)
        with open(path, "r") as f:
            return f.read()

    def write_json(self, path, data):
        """Sorted keys and fixed indentation, so equal data gives equal bytes."""
        return self.write_text(path, json.dumps(data, indent=2, sort_keys=True) + "\n")

    def save_model(self, model, path):
        self.write_text(path, model.to_text())
        logger.info(f"Saved {model.strategy_tag} model with {model.n_labels} labels to {path}")
        return path

    def load_model(self, path):
        return OvRModel.from_text(self.read_text(path), path=path)

    def save_predictions(self, predictions, path):
        """One line per instance; an empty set is an empty line."""
        return self.write_text(path, "".join(line + "\n" for line in predictions.to_lines()))

    def load_predictions(self, path, n_labels=None):
        # Every line ends with a newline, so the last split piece is not an instance.
        lines = self.read_text(path).split("\n")[:-1]
        return PredictionSet.from_lines(lines, n_labels=n_labels, path=path)

    def save_decisions(self, decisions, path):
        """Tab-separated decision values, one row per instance."""
        rows = ["\t".join(repr(float(v)) for v in row) for row in np.asarray(decisions)]
        return self.write_text(path, "".join(row + "\n" for row in rows))

    def load_decisions(self, path):
        rows = []
        for number, line in enumerate(self.read_text(path).split("\n")[:-1], start=1):
            try:
                rows.append([float(v) for v in line.split("\t")] if line else [])
            except ValueError:
                raise DatasetFormatError("non-numeric decision value", path=path, line_number=number)
        widths = {len(row) for row in rows}
        if len(widths) > 1:
            raise DatasetFormatError("decision rows have different lengths", path=path)
        return np.array(rows, dtype=np.float64).reshape(len(rows), widths.pop() if widths else 0)


# Create a singleton instance
artifact_store = ArtifactStore()

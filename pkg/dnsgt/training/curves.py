import pandas as pd


class LossCurve:
    """The loss of every training step, with optional evaluation metrics on some steps."""

    def __init__(self):
        self.rows = []

    def __len__(self):
        return len(self.rows)

    def record(self, step, loss, **metrics):
        self.rows.append({"step": step, "loss": loss, **metrics})

    @property
    def losses(self):
        return [row["loss"] for row in self.rows]

    def to_dataframe(self):
        """Get the curve as a data frame with `step` and `loss` columns followed by any metric columns.

        :return pandas.DataFrame:
        """
        frame = pd.DataFrame(self.rows)

        if frame.empty:
            return pd.DataFrame(columns=["step", "loss"])

        metric_columns = [column for column in frame.columns if column not in ("step", "loss")]
        return frame[["step", "loss", *metric_columns]]

    def to_csv(self, path):
        """Write the curve as CSV.

        :param str path:
        :return None:
        """
        self.to_dataframe().to_csv(path, index=False, float_format="%.10g", lineterminator="\n")

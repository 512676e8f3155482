"""Write the WHAS500 data shipped with scikit-survival as a fastcox CSV.

    pip install scikit-survival
    python3 tools/export_whas500.py tests/data/whas500.csv
"""

import sys

from sksurv.datasets import load_whas500


def main(path):
    x, y = load_whas500()
    df = x.copy()
    for col in df.columns:
        if str(df[col].dtype) == "category":
            df[col] = df[col].astype(float)
    df.insert(0, "fstat", y["fstat"].astype(int))
    df.insert(0, "lenfol", y["lenfol"])
    df.to_csv(path, index=False)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "whas500.csv")

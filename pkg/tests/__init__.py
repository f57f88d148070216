import sys
import os

from pathlib import Path

sys.path.append(str(Path(__file__).parents[1]))

import spotvol

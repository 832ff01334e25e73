# Copyright (c) 2026, Hadeel Milad and contributors
# For license information, please see license.txt

import sys

from autoselect.cli import main

sys.exit(main())

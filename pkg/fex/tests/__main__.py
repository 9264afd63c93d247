# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: fex contributors

#!/usr/bin/python3
import os
import unittest

if __name__ == '__main__':
	here = os.path.dirname(os.path.abspath(__file__))
	testsuite = unittest.TestLoader().discover(here, top_level_dir=os.path.dirname(os.path.dirname(here)))
	unittest.TextTestRunner(verbosity=1).run(testsuite)

from sys import exit

from ltrexplain.cli import main

exit(main())

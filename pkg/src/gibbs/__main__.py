from gibbs.cli import main

raise SystemExit(main())

from ibac.cli import main

raise SystemExit(main())

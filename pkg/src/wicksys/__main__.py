from wicksys.cli import main

main()

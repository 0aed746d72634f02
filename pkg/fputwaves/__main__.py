from fputwaves.main import main

main()

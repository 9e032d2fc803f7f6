# Container selector package

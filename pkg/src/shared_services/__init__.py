# src/shared_services/__init__.py

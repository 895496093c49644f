"""dmimo-repeater-sync - Repeater-aided phase synchronization for distributed MIMO."""

__version__ = "0.1.0"
__app_name__ = "dmimo-repeater-sync"

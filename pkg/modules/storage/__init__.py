from .models import (
    PreferenceFile, CodebookSetFile, DesignResultFile, TwoUserDesignFile,
    PreferenceSpecFile, JointPreferenceFile,
)
from .operations import DesignStore

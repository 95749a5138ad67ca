from turan_domains.callbacks.CallbackBase import TuranCallbackBase
from turan_domains.callbacks.CallbackSave import TuranCallbackSaveCheckpoint
from turan_domains.callbacks.CallbackStatistics import TuranHistory, TuranRoundStatistics

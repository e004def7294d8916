def search():
    messages = ''
    info, msg = get_entity_info(entity_aliases = ['Sun Maosong', 'Professor Sun Maosong']) )
    messages += msg
    return messages
